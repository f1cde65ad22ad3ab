#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cvqa::detail {

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// POSTs `body` to `<base_url><path>`. `base_url` is scheme://host[:port][/prefix].
/// Throws ServiceError(transport) when no response is received.
HttpResponse http_post(std::string_view base_url, std::string_view path, const std::string& body,
                       const std::string& content_type,
                       const std::vector<std::pair<std::string, std::string>>& headers,
                       std::chrono::milliseconds timeout);

}  // namespace cvqa::detail
