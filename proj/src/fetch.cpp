#include "sprw/fetch.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>

#include <curl/curl.h>
#include <zlib.h>

namespace sprw {

namespace {

namespace fs = std::filesystem;

struct KnownMatrix {
    const char* group;
    Index n;
};

const std::map<std::string, KnownMatrix, std::less<>>& known_matrices()
{
    static const std::map<std::string, KnownMatrix, std::less<>> table = {
        {"lung2", {"Norris", 109460}},
        {"lung1", {"Norris", 1650}},
        {"bcsstk01", {"HB", 48}},
        {"west0479", {"HB", 479}},
    };
    return table;
}

std::string getenv_or(const char* name, std::string fallback)
{
    const char* v = std::getenv(name);
    return (v != nullptr && *v != '\0') ? std::string(v) : std::move(fallback);
}

std::size_t append_body(char* data, std::size_t size, std::size_t count, void* user)
{
    static_cast<std::string*>(user)->append(data, size * count);
    return size * count;
}

std::string http_get(const std::string& url, long timeout_seconds)
{
    static const bool initialized = [] { return curl_global_init(CURL_GLOBAL_DEFAULT) == CURLE_OK; }();
    if (!initialized)
        throw FetchError("libcurl initialisation failed");

    std::unique_ptr<CURL, decltype(&curl_easy_cleanup)> curl(curl_easy_init(), &curl_easy_cleanup);
    if (!curl)
        throw FetchError("libcurl initialisation failed");

    std::string body;
    char error[CURL_ERROR_SIZE] = {};
    curl_easy_setopt(curl.get(), CURLOPT_URL, url.c_str());
    curl_easy_setopt(curl.get(), CURLOPT_FOLLOWLOCATION, 1L);
    curl_easy_setopt(curl.get(), CURLOPT_TIMEOUT, timeout_seconds);
    curl_easy_setopt(curl.get(), CURLOPT_CONNECTTIMEOUT, 30L);
    curl_easy_setopt(curl.get(), CURLOPT_WRITEFUNCTION, &append_body);
    curl_easy_setopt(curl.get(), CURLOPT_WRITEDATA, &body);
    curl_easy_setopt(curl.get(), CURLOPT_ERRORBUFFER, error);

    const CURLcode rc = curl_easy_perform(curl.get());
    if (rc != CURLE_OK)
        throw FetchError("download of " + url + " failed: " +
                         (error[0] != '\0' ? std::string(error) : curl_easy_strerror(rc)));
    long status = 0;
    curl_easy_getinfo(curl.get(), CURLINFO_RESPONSE_CODE, &status);
    if (status == 404)
        throw FetchError("matrix not found (HTTP 404): " + url);
    if (status != 200)
        throw FetchError("download of " + url + " failed with HTTP status " +
                         std::to_string(status));
    return body;
}

std::uint64_t parse_octal(std::string_view field)
{
    std::uint64_t value = 0;
    for (char c : field) {
        if (c == '\0' || c == ' ')
            continue;
        if (c < '0' || c > '7')
            break;
        value = value * 8 + static_cast<std::uint64_t>(c - '0');
    }
    return value;
}

std::string c_string(std::string_view field)
{
    return std::string(field.substr(0, field.find('\0')));
}

// Reads the size line of a Matrix Market file to check its dimension
// without parsing every entry.
Index mtx_dimension(const fs::path& path)
{
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '%')
            continue;
        return std::strtoll(line.c_str(), nullptr, 10);
    }
    return -1;
}

}  // namespace

namespace detail {

std::string gunzip(std::string_view compressed)
{
    z_stream zs{};
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
        throw FetchError("zlib initialisation failed");
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
    zs.avail_in = static_cast<uInt>(compressed.size());

    std::string out;
    char buffer[1 << 16];
    int rc = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buffer);
        zs.avail_out = sizeof buffer;
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw FetchError("corrupt gzip data");
        }
        out.append(buffer, sizeof buffer - zs.avail_out);
    } while (rc != Z_STREAM_END && (zs.avail_in > 0 || zs.avail_out == 0));
    inflateEnd(&zs);
    if (rc != Z_STREAM_END)
        throw FetchError("truncated gzip data");
    return out;
}

std::optional<std::string> extract_tar_member(std::string_view archive, std::string_view filename)
{
    constexpr std::size_t kBlock = 512;
    std::size_t pos = 0;
    std::string long_name;
    while (pos + kBlock <= archive.size()) {
        const std::string_view header = archive.substr(pos, kBlock);
        if (header.find_first_not_of('\0') == std::string_view::npos)
            break;  // end-of-archive marker
        const std::uint64_t size = parse_octal(header.substr(124, 12));
        const char type = header[156];
        std::string name = c_string(header.substr(0, 100));
        if (header.substr(257, 5) == "ustar") {
            const std::string prefix = c_string(header.substr(345, 155));
            if (!prefix.empty())
                name = prefix + "/" + name;
        }
        if (!long_name.empty()) {
            name = long_name;
            long_name.clear();
        }
        const std::size_t data = pos + kBlock;
        if (data + size > archive.size())
            throw FetchError("truncated tar archive");
        const std::string_view body = archive.substr(data, size);

        if (type == 'L') {
            long_name = c_string(body);
        } else if ((type == '0' || type == '\0') &&
                   fs::path(name).filename().string() == filename) {
            return std::string(body);
        }
        pos = data + (size + kBlock - 1) / kBlock * kBlock;
    }
    return std::nullopt;
}

}  // namespace detail

fs::path default_cache_dir()
{
    if (auto dir = getenv_or("SPRW_CACHE_DIR", ""); !dir.empty())
        return dir;
    if (auto xdg = getenv_or("XDG_CACHE_HOME", ""); !xdg.empty())
        return fs::path(xdg) / "sprw";
    return fs::path(getenv_or("HOME", ".")) / ".cache" / "sprw";
}

std::string default_base_url()
{
    return getenv_or("SPRW_FETCH_BASE_URL", "https://sparse.tamu.edu/MM");
}

std::optional<MatrixName> resolve_matrix_name(std::string_view spec)
{
    if (auto slash = spec.find('/'); slash != std::string_view::npos) {
        MatrixName m{std::string(spec.substr(0, slash)), std::string(spec.substr(slash + 1))};
        if (m.group.empty() || m.name.empty() || m.name.find('/') != std::string::npos)
            return std::nullopt;
        return m;
    }
    const auto& table = known_matrices();
    if (auto it = table.find(spec); it != table.end())
        return MatrixName{it->second.group, it->first};
    return std::nullopt;
}

fs::path cache_path(const MatrixName& name, const fs::path& cache_dir)
{
    return cache_dir / name.group / (name.name + ".mtx");
}

fs::path fetch_matrix(std::string_view spec, const FetchOptions& options)
{
    const std::string base = options.base_url.empty() ? default_base_url() : options.base_url;
    const auto resolved = resolve_matrix_name(spec);
    if (!resolved)
        throw FetchError("unknown matrix '" + std::string(spec) + "': no collection group known, so no URL of the form " +
                         base + "/<Group>/" + std::string(spec) +
                         ".tar.gz can be tried; pass it as Group/name");

    const fs::path cache_dir = options.cache_dir.empty() ? default_cache_dir() : options.cache_dir;
    const fs::path target = cache_path(*resolved, cache_dir);
    std::error_code ec;
    if (fs::is_regular_file(target, ec) && fs::file_size(target, ec) > 0)
        return target;

    const std::string url = base + "/" + resolved->group + "/" + resolved->name + ".tar.gz";
    const std::string archive = detail::gunzip(http_get(url, options.timeout_seconds));
    const auto member = detail::extract_tar_member(archive, resolved->name + ".mtx");
    if (!member || member->empty())
        throw FetchError("archive " + url + " holds no " + resolved->name + ".mtx");

    fs::create_directories(target.parent_path(), ec);
    if (ec)
        throw FetchError("cannot create cache directory '" + target.parent_path().string() +
                         "': " + ec.message());
    const fs::path partial = target.string() + ".part";
    {
        std::ofstream out(partial, std::ios::binary | std::ios::trunc);
        out.write(member->data(), static_cast<std::streamsize>(member->size()));
        if (!out)
            throw FetchError("failed to write '" + partial.string() + "'");
    }

    const auto& table = known_matrices();
    if (auto it = table.find(resolved->name);
        it != table.end() && it->second.group == resolved->group) {
        if (const Index n = mtx_dimension(partial); n != it->second.n) {
            fs::remove(partial, ec);
            throw FetchError(resolved->name + ".mtx has dimension " + std::to_string(n) +
                             ", expected " + std::to_string(it->second.n));
        }
    }
    fs::rename(partial, target, ec);
    if (ec)
        throw FetchError("failed to move '" + partial.string() + "' into the cache: " +
                         ec.message());
    return target;
}

}  // namespace sprw
