/* Generated by sprw. Do not edit. */
/* Specialized triangular solve kernels, file 1 of 1. */

void level0_part0(double *restrict x, const double *restrict b)
{
    x[0] = 0.5*b[0];
}

void level1_part0(double *restrict x, const double *restrict b)
{
    x[1] = 0.25*b[1] + -0.25*x[0];
}

void level2_part0(double *restrict x, const double *restrict b)
{
    x[2] = 0.5*b[2] + 0.5*x[1];
}

void level3_part0(double *restrict x, const double *restrict b)
{
    x[3] = 0.25*b[3] + -0.75*x[1] + -0.25*x[2];
}
