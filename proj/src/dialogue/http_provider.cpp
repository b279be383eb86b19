#include <httplib.h>

#include <nlohmann/json.hpp>

#include "cbai/error.hpp"
#include "cbai/provider.hpp"

namespace cbai {

std::string HttpCompletionProvider::complete(const CompletionRequest& request) {
    httplib::Client client(config_.host, config_.port);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(request.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(request.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());

    nlohmann::json body = {{"prompt", request.prompt},
                           {"temperature", request.temperature},
                           {"max_tokens", request.max_tokens}};
    if (!config_.model.empty()) body["model"] = config_.model;
    if (!request.stop.empty()) body["stop"] = request.stop;
    httplib::Headers headers;
    if (!config_.api_key.empty()) headers.emplace("Authorization", "Bearer " + config_.api_key);

    const auto res = client.Post(config_.path, headers, body.dump(), "application/json");
    if (!res) {
        throw Error(ErrorCode::ProviderUnavailable, "http: " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
        throw Error(ErrorCode::ProviderUnavailable, "http: status " + std::to_string(res->status));
    }
    try {
        const auto j = nlohmann::json::parse(res->body);
        return j.at("choices").at(0).at("text").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ProviderUnavailable, std::string("http: malformed response: ") + e.what());
    }
}

}  // namespace cbai
