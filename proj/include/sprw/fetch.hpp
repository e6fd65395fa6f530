#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "sprw/common.hpp"

namespace sprw {

struct FetchOptions {
    std::filesystem::path cache_dir;  // empty: default_cache_dir()
    std::string base_url;             // empty: default_base_url()
    long timeout_seconds = 120;
};

/// $SPRW_CACHE_DIR, else $XDG_CACHE_HOME/sprw, else ~/.cache/sprw.
std::filesystem::path default_cache_dir();

/// $SPRW_FETCH_BASE_URL, else the public SuiteSparse Matrix Market tree.
std::string default_base_url();

/// A collection matrix as "Group/name". Bare names are resolved through a
/// small built-in table (e.g. "lung2" -> "Norris/lung2").
struct MatrixName {
    std::string group;
    std::string name;
};

std::optional<MatrixName> resolve_matrix_name(std::string_view spec);

/// Where a fetched matrix lives in the cache: <cache>/<group>/<name>.mtx.
std::filesystem::path cache_path(const MatrixName& name, const std::filesystem::path& cache_dir);

/// Returns the cached .mtx path, downloading and extracting
/// <base>/<group>/<name>.tar.gz on a cache miss. Throws FetchError for
/// unknown names, HTTP errors and network failures.
std::filesystem::path fetch_matrix(std::string_view spec, const FetchOptions& options = {});

namespace detail {

std::string gunzip(std::string_view compressed);

/// Contents of the first regular tar member whose file name (last path
/// component) equals `filename`.
std::optional<std::string> extract_tar_member(std::string_view archive, std::string_view filename);

}  // namespace detail

}  // namespace sprw
