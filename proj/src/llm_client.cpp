#include <httplib.h>

#include "autokg/llm_client.hpp"

#include <chrono>
#include <cmath>
#include <regex>
#include <thread>

#include <spdlog/spdlog.h>

#include "autokg/error.hpp"

namespace autokg {
namespace {

constexpr std::string_view kPrompt =
    "You are an information extraction system for Bengali text.\n"
    "Split the text into sentences on the danda (U+0964), '.', '?', '!' and blank lines, numbering them from 0.\n"
    "List every named entity, date, place, organisation, event and salient concept.\n"
    "For each entity return its surface form exactly as written, an entity type in upper case "
    "(PERSON, PLACE, ORG, DATE, EVENT, CONCEPT or UNKNOWN), part-of-speech tags, and the indices "
    "of the sentences it occurs in.\n"
    "Also list relations between entities as head/tail surface pairs with a short label.\n"
    "Answer with JSON only, shaped as "
    "{\"entities\":[{\"surface\":\"...\",\"type\":\"...\",\"tags\":[\"...\"],\"sentence_indices\":[0]}],"
    "\"relations\":[{\"head_surface\":\"...\",\"tail_surface\":\"...\",\"label\":\"...\"}]}.\n";

struct Url {
    std::string scheme_host_port;
    std::string path;
};

Url split_url(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re)) throw TransportError("unsupported LLM endpoint URL: " + url);
    return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

}  // namespace

std::string_view extraction_prompt() { return kPrompt; }

std::string build_llm_request(std::string_view text, const LlmClientConfig& cfg) {
    nlohmann::json body = {{"model", cfg.model},
                           {"task", "entity_extraction"},
                           {"text", std::string(text)},
                           {"prompt", std::string(kPrompt)},
                           {"prompt_version", std::string(kExtractionPromptVersion)}};
    return body.dump();
}

ExtractionResult extract_via_llm(std::string_view text, const LlmClientConfig& cfg) {
    const Url url = split_url(cfg.endpoint);
    httplib::Client client(url.scheme_host_port);
    const auto secs = static_cast<time_t>(std::floor(cfg.timeout_s));
    const auto usecs = static_cast<time_t>((cfg.timeout_s - std::floor(cfg.timeout_s)) * 1e6);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers headers;
    if (!cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg.api_key);
    const std::string body = build_llm_request(text, cfg);

    const int attempts = std::max(cfg.retries, 0) + 1;
    for (int attempt = 1;; ++attempt) {
        auto res = client.Post(url.path, headers, body, "application/json");
        std::string failure;
        int status = 0;
        bool timed_out = false;
        if (!res) {
            const httplib::Error err = res.error();
            timed_out = err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout;
            failure = httplib::to_string(err);
        } else if (res->status >= 200 && res->status < 300) {
            return parse_extraction(res->body);
        } else {
            status = res->status;
        }

        const bool retryable = !res || status >= 500 || status == 429;
        if (!retryable || attempt >= attempts) {
            if (status != 0) throw HttpStatus(status, attempt);
            if (timed_out) throw Timeout("LLM request timed out after " + std::to_string(attempt) + " attempt(s): " + failure);
            throw TransportError("LLM request failed after " + std::to_string(attempt) + " attempt(s): " + failure);
        }
        const double wait = cfg.backoff_base_s * std::pow(cfg.backoff_factor, attempt - 1);
        spdlog::warn("LLM attempt {}/{} failed ({}); retrying in {:.2f}s", attempt, attempts,
                     status ? "HTTP " + std::to_string(status) : failure, wait);
        std::this_thread::sleep_for(std::chrono::duration<double>(wait));
    }
}

}  // namespace autokg
