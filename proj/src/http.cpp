#include "http.hpp"

#include <httplib.h>

#include "cvqa/error.hpp"

namespace cvqa::detail {

HttpResponse http_post(std::string_view base_url, std::string_view path, const std::string& body,
                       const std::string& content_type,
                       const std::vector<std::pair<std::string, std::string>>& headers,
                       std::chrono::milliseconds timeout) {
    std::string url(base_url);
    std::string prefix;
    const auto scheme_end = url.find("://");
    const auto path_start = url.find('/', scheme_end == std::string::npos ? 0 : scheme_end + 3);
    if (path_start != std::string::npos) {
        prefix = url.substr(path_start);
        url.resize(path_start);
        while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
    }

    httplib::Client client(url);
    if (!client.is_valid()) {
        throw ServiceError(ServiceError::Kind::transport, "invalid service address \"" + std::string(base_url) + "\"");
    }
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());

    httplib::Headers hdrs;
    for (const auto& [k, v] : headers) hdrs.emplace(k, v);
    auto result = client.Post(prefix + std::string(path), hdrs, body, content_type);
    if (!result) {
        throw ServiceError(ServiceError::Kind::transport, "request to " + std::string(base_url) + std::string(path) +
                                                              " failed: " + httplib::to_string(result.error()));
    }
    return {result->status, result->body};
}

}  // namespace cvqa::detail
