#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace cbai {

struct CompletionRequest {
    std::string prompt;
    double temperature = 0.0;
    std::chrono::milliseconds timeout{10000};
    int max_tokens = 128;
    std::vector<std::string> stop;
};

// Single request/response text contract. Implementations throw
// Error(ProviderUnavailable) when the backend cannot be reached.
class LanguageModelProvider {
public:
    virtual ~LanguageModelProvider() = default;
    virtual std::string complete(const CompletionRequest& request) = 0;
    virtual std::string name() const = 0;
};

// Deterministic offline provider. Keyword prompts are answered from rule
// tables; sentence prompts echo the keywords as "<keywords>." plus the stop
// token.
class MockProvider : public LanguageModelProvider {
public:
    std::string complete(const CompletionRequest& request) override;
    std::string name() const override { return "mock"; }
};

// Wraps a callable; handy for tests and scripted sessions.
class CallbackProvider : public LanguageModelProvider {
public:
    using Fn = std::function<std::string(const CompletionRequest&)>;
    explicit CallbackProvider(Fn fn, std::string name = "callback") : fn_(std::move(fn)), name_(std::move(name)) {}
    std::string complete(const CompletionRequest& request) override { return fn_(request); }
    std::string name() const override { return name_; }

private:
    Fn fn_;
    std::string name_;
};

// Always throws ProviderUnavailable.
class UnavailableProvider : public LanguageModelProvider {
public:
    std::string complete(const CompletionRequest& request) override;
    std::string name() const override { return "unavailable"; }
};

struct HttpProviderConfig {
    std::string host = "127.0.0.1";
    int port = 8000;
    std::string path = "/v1/completions";
    std::string model;
    std::string api_key;
};

// Plain-HTTP client for an OpenAI-style /v1/completions endpoint (a local
// server or a TLS-terminating proxy). Reads choices[0].text.
class HttpCompletionProvider : public LanguageModelProvider {
public:
    explicit HttpCompletionProvider(HttpProviderConfig config) : config_(std::move(config)) {}
    std::string complete(const CompletionRequest& request) override;
    std::string name() const override { return "http"; }

private:
    HttpProviderConfig config_;
};

}  // namespace cbai
