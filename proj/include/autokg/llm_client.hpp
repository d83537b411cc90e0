#pragma once

#include <string>
#include <string_view>

#include "autokg/extract.hpp"

namespace autokg {

struct LlmClientConfig {
    std::string endpoint;  // http(s)://host[:port]/path
    std::string model = "gpt-3.5-turbo";
    double timeout_s = 30.0;
    int retries = 2;
    // Backoff before retry n (1-based) is backoff_base_s * backoff_factor^(n-1).
    double backoff_base_s = 1.0;
    double backoff_factor = 2.0;
    // Sent as a bearer token when non-empty.
    std::string api_key;
};

// Versioned prompt sent alongside the text.
inline constexpr std::string_view kExtractionPromptVersion = "entity_extraction/v1";
std::string_view extraction_prompt();

// Request body posted to the endpoint.
std::string build_llm_request(std::string_view text, const LlmClientConfig& cfg);

// POSTs the text and validates the response like a fixture file.
// Throws Timeout, HttpStatus, TransportError, SchemaViolation.
ExtractionResult extract_via_llm(std::string_view text, const LlmClientConfig& cfg);

}  // namespace autokg
