#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "slideeval/judge.hpp"
#include "slideeval/slide.hpp"

namespace slideeval {

enum class Task { extract, judge, order };
enum class RunStatus { ok, parse_failure, transport_failure };

std::string_view to_string(Task t);
std::string_view to_string(RunStatus s);
std::optional<Task> parse_task(std::string_view text);
std::optional<RunStatus> parse_run_status(std::string_view text);

struct RetryPolicy {
    int max_attempts = 3;
    double backoff_base_ms = 500.0;  // delay before attempt k (k >= 1) is base * 2^(k-1)
};

/// An OpenAI-compatible chat-completions endpoint. `api_key_env` names the
/// environment variable holding the key; the key itself is never stored.
struct ModelEndpoint {
    std::string name;              // label used in records and reports
    std::string kind = "openai";   // openai | azure | replay | synthetic
    std::string base_url;          // openai: ".../v1"; azure: resource URL; replay: JSONL path
    std::string model;             // model name, or azure deployment
    std::string api_key_env;
    std::string api_version = "2024-06-01";  // azure only
    double temperature = 0.1;
    std::optional<std::string> reasoning_effort;
    std::size_t max_concurrency = 4;
    RetryPolicy retry;
    double timeout_s = 120.0;

    nlohmann::json to_json() const;
    static ModelEndpoint from_json(const nlohmann::json& j);
};

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// ---- prompts ----------------------------------------------------------------

enum class JudgeDimension { text, geometry, style };

std::string_view to_string(JudgeDimension d);
std::optional<JudgeDimension> parse_dimension(std::string_view text);
/// "text quality", "layout geometry", "style".
std::string_view display_name(JudgeDimension d);
const std::vector<std::string>& judge_criteria(JudgeDimension d);

struct JudgeAnchors {
    double min = 1, mid = 3, max = 5;
    std::string low_label = "very poor";
    std::string mid_label = "acceptable";
    std::string high_label = "excellent";
};
JudgeAnchors judge_anchors(Scale scale);

/// System text for extraction: frame size, units and the field reference.
std::string extraction_system_prompt(int width = 960, int height = 540);
std::string judge_system_prompt(JudgeDimension d, Scale scale);
std::string ordering_system_prompt(std::size_t n_slides);

/// JSON schema for structured-output mode.
const nlohmann::json& slide_json_schema();

/// One chat-completions request. `key` identifies the request for replay
/// and records: "<task>|<subject>|<run>".
struct ChatRequest {
    Task task = Task::extract;
    std::string key;
    nlohmann::json body;  // messages, temperature, response_format; no model/credential

    /// sha256 of the compact body dump.
    std::string hash() const;
};

std::string image_data_uri(std::string_view png_bytes);

ChatRequest build_extraction_request(std::string_view png_bytes, const std::string& slide_id, int run,
                                     double temperature = 0.1);
ChatRequest build_judge_request(std::string_view png_bytes, const std::string& subject, JudgeDimension d,
                                Scale scale, int run, double temperature = 0.1);
/// Images are labelled 1..n in the order given.
ChatRequest build_ordering_request(const std::vector<std::string>& png_bytes, const std::string& deck_id, int run,
                                   double temperature = 0.1);

std::string extraction_key(std::string_view slide_id, int run);
std::string judge_key(std::string_view subject, JudgeDimension d, Scale scale, int run);
std::string ordering_key(std::string_view deck_id, int run);

// ---- reply parsing ----------------------------------------------------------

/// Strips surrounding whitespace and one enclosing markdown code fence.
std::string strip_fence(std::string_view content);
/// Validates the reply as a slide document (geometry rounded to integers).
/// nullopt on any syntax or schema failure.
std::optional<Slide> parse_extraction_reply(std::string_view content, const std::string& slide_id);
/// The whole reply must be one integer within the scale.
std::optional<int> parse_judge_reply(std::string_view content, Scale scale);
/// Accepts a JSON array of integers or an object whose "order" is one.
std::optional<std::vector<int>> parse_ordering_reply(std::string_view content);

// ---- transport --------------------------------------------------------------

struct Completion {
    bool transport_ok = false;
    int http_status = 0;
    std::string content;  // assistant message text when transport_ok
    std::string error;
    /// Transport errors and 429/5xx replies are worth another attempt.
    bool retryable() const { return !transport_ok && (http_status == 0 || http_status == 429 || http_status >= 500); }
};

class ChatClient {
public:
    virtual ~ChatClient() = default;
    virtual Completion complete(const ChatRequest& request) = 0;
    /// True when the client never touches the network.
    virtual bool offline() const { return true; }
};

/// HTTP(S) chat-completions client. Reads the key from the endpoint's
/// environment variable at construction.
class HttpChatClient : public ChatClient {
public:
    explicit HttpChatClient(ModelEndpoint endpoint);
    Completion complete(const ChatRequest& request) override;
    bool offline() const override { return false; }

    /// Full request body as sent: model and sampling fields merged in.
    nlohmann::json wire_body(const ChatRequest& request) const;
    std::string request_path() const;

private:
    ModelEndpoint endpoint_;
    std::string key_;
    std::string scheme_host_;
    std::string path_prefix_;
};

/// Serves canned completions from JSONL lines of the form
/// {"key": ..., "content": ...} or {"key": ..., "http_status": 503, "error": ...}.
/// Unknown keys are transport failures.
class ReplayChatClient : public ChatClient {
public:
    static ReplayChatClient from_file(const std::filesystem::path& path);
    static ReplayChatClient from_lines(std::string_view jsonl);
    void add(std::string key, Completion c);
    Completion complete(const ChatRequest& request) override;
    std::size_t size() const { return canned_.size(); }

private:
    std::map<std::string, Completion, std::less<>> canned_;
};

/// Delegates to a function; used for synthetic predictors and test doubles.
class FunctionChatClient : public ChatClient {
public:
    using Fn = std::function<Completion(const ChatRequest&)>;
    explicit FunctionChatClient(Fn fn) : fn_(std::move(fn)) {}
    Completion complete(const ChatRequest& request) override { return fn_(request); }

private:
    Fn fn_;
};

/// Appends every completion served by `inner` to a JSONL file in replay format.
class RecordingChatClient : public ChatClient {
public:
    RecordingChatClient(std::shared_ptr<ChatClient> inner, std::filesystem::path out);
    Completion complete(const ChatRequest& request) override;
    bool offline() const override { return inner_->offline(); }

private:
    std::shared_ptr<ChatClient> inner_;
    std::filesystem::path out_;
    std::mutex mu_;
};

std::string to_replay_line(const std::string& key, const Completion& c);

// ---- execution --------------------------------------------------------------

struct RunRecord {
    std::string slide_id;  // subject: slide, variant or deck id
    Task task = Task::extract;
    int run = 0;
    std::string key;
    std::string request_hash;
    std::string model;
    std::string raw_response;
    RunStatus status = RunStatus::transport_failure;
    int attempts = 0;
    double latency_ms = 0.0;
    std::string error;

    nlohmann::json to_json(bool include_latency = true) const;
    static RunRecord from_json(const nlohmann::json& j);
};

using ReplyParser = std::function<bool(std::string_view content)>;

struct GatewayRequest {
    ChatRequest chat;
    std::string subject;
    int run = 0;
    ReplyParser accepts;  // true when the content parses for its task
};

class Gateway {
public:
    using Sleeper = std::function<void(std::chrono::milliseconds)>;

    Gateway(ModelEndpoint endpoint, std::shared_ptr<ChatClient> client, Sleeper sleeper = {});

    const ModelEndpoint& endpoint() const { return endpoint_; }
    ChatClient& client() { return *client_; }

    /// One terminal record per request; only retryable transport errors are retried.
    RunRecord execute(const GatewayRequest& request);
    /// Runs all requests with at most endpoint.max_concurrency in flight.
    /// Records come back in request order.
    std::vector<RunRecord> execute_all(const std::vector<GatewayRequest>& requests);

private:
    ModelEndpoint endpoint_;
    std::shared_ptr<ChatClient> client_;
    Sleeper sleeper_;
};

/// Builds the client an endpoint describes (http for openai/azure, replay for
/// replay). Synthetic endpoints need a caller-supplied client and throw here.
std::shared_ptr<ChatClient> make_client(const ModelEndpoint& endpoint);

// ---- task helpers -----------------------------------------------------------

struct ExtractionRun {
    RunRecord record;
    std::optional<Slide> slide;
};

std::vector<ExtractionRun> request_extraction(Gateway& gw, std::string_view png_bytes, const std::string& slide_id,
                                              int n_runs = 3);

struct JudgeRun {
    RunRecord record;
    std::optional<int> score;
};

JudgeRun request_judge_score(Gateway& gw, std::string_view png_bytes, const std::string& subject, JudgeDimension d,
                             Scale scale, int run = 0);

struct OrderingRun {
    RunRecord record;
    std::optional<std::vector<int>> order;  // labels as shown, 1-based
};

OrderingRun request_ordering(Gateway& gw, const std::vector<std::string>& shuffled_png, const std::string& deck_id,
                             int run = 0);

struct Accounting {
    std::size_t ok = 0;
    std::size_t parse_failure = 0;
    std::size_t transport_failure = 0;
    std::size_t total() const { return ok + parse_failure + transport_failure; }
};

std::map<Task, Accounting> account(const std::vector<RunRecord>& records);

}  // namespace slideeval
