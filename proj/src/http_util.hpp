#pragma once

#include <string>
#include <string_view>

namespace blindgate::detail {

/// "http://host:port/some/path" -> {"http://host:port", "/some/path"}.
/// An absent path maps to `default_path`. Throws std::invalid_argument on
/// anything that is not an http(s) URL.
struct SplitUrl {
    std::string base;
    std::string path;
};

SplitUrl split_url(std::string_view url, std::string_view default_path);

} // namespace blindgate::detail
