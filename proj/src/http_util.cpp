#include "http_util.hpp"

#include <stdexcept>

namespace blindgate::detail {

SplitUrl split_url(std::string_view url, std::string_view default_path) {
    std::string_view rest = url;
    std::size_t scheme_end = rest.find("://");
    if (scheme_end == std::string_view::npos) {
        throw std::invalid_argument("url lacks a scheme: " + std::string(url));
    }
    std::string_view scheme = rest.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") {
        throw std::invalid_argument("unsupported url scheme: " + std::string(scheme));
    }
    std::size_t path_start = rest.find('/', scheme_end + 3);
    SplitUrl out;
    if (path_start == std::string_view::npos) {
        out.base = std::string(rest);
        out.path = std::string(default_path);
    } else {
        out.base = std::string(rest.substr(0, path_start));
        out.path = std::string(rest.substr(path_start));
    }
    if (out.base.size() == scheme_end + 3) {
        throw std::invalid_argument("url lacks a host: " + std::string(url));
    }
    return out;
}

} // namespace blindgate::detail
