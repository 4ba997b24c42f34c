#pragma once

#include <string>

namespace kgg {

// "https://host:8443/v1" -> {"https://host:8443", "/v1"}.
struct SplitUrl {
  std::string origin;
  std::string path_prefix;
};

SplitUrl split_url(const std::string& url);

}  // namespace kgg
