#include "slideeval/gateway.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "slideeval/digest.hpp"
#include "slideeval/slide_io.hpp"

namespace slideeval {

using nlohmann::json;

std::string_view to_string(Task t) {
    switch (t) {
        case Task::extract: return "extract";
        case Task::judge: return "judge";
        case Task::order: return "order";
    }
    return "extract";
}

std::string_view to_string(RunStatus s) {
    switch (s) {
        case RunStatus::ok: return "ok";
        case RunStatus::parse_failure: return "parse_failure";
        case RunStatus::transport_failure: return "transport_failure";
    }
    return "ok";
}

std::optional<Task> parse_task(std::string_view text) {
    for (Task t : {Task::extract, Task::judge, Task::order}) {
        if (to_string(t) == text) return t;
    }
    return std::nullopt;
}

std::optional<RunStatus> parse_run_status(std::string_view text) {
    for (RunStatus s : {RunStatus::ok, RunStatus::parse_failure, RunStatus::transport_failure}) {
        if (to_string(s) == text) return s;
    }
    return std::nullopt;
}

json ModelEndpoint::to_json() const {
    json j = {{"name", name},
              {"kind", kind},
              {"base_url", base_url},
              {"model", model},
              {"api_key_env", api_key_env},
              {"api_version", api_version},
              {"temperature", temperature},
              {"max_concurrency", max_concurrency},
              {"retry", {{"max_attempts", retry.max_attempts}, {"backoff_base_ms", retry.backoff_base_ms}}},
              {"timeout_s", timeout_s}};
    if (reasoning_effort) j["reasoning_effort"] = *reasoning_effort;
    return j;
}

ModelEndpoint ModelEndpoint::from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("endpoint must be an object");
    static const std::set<std::string> known = {"name",        "kind",      "base_url",        "model",
                                                "api_key_env", "api_version", "temperature",   "max_concurrency",
                                                "retry",       "timeout_s", "reasoning_effort"};
    for (const auto& [k, _] : j.items()) {
        if (!known.contains(k)) throw ConfigError("unknown endpoint field '" + k + "'");
    }
    ModelEndpoint e;
    try {
        e.name = j.value("name", "");
        e.kind = j.value("kind", e.kind);
        e.base_url = j.value("base_url", "");
        e.model = j.value("model", "");
        e.api_key_env = j.value("api_key_env", "");
        e.api_version = j.value("api_version", e.api_version);
        e.temperature = j.value("temperature", e.temperature);
        e.max_concurrency = j.value("max_concurrency", e.max_concurrency);
        e.timeout_s = j.value("timeout_s", e.timeout_s);
        if (j.contains("reasoning_effort")) e.reasoning_effort = j.at("reasoning_effort").get<std::string>();
        if (j.contains("retry")) {
            const json& r = j.at("retry");
            e.retry.max_attempts = r.value("max_attempts", e.retry.max_attempts);
            e.retry.backoff_base_ms = r.value("backoff_base_ms", e.retry.backoff_base_ms);
        }
    } catch (const json::exception& ex) {
        throw ConfigError(std::string("endpoint: ") + ex.what());
    }
    if (e.name.empty()) throw ConfigError("endpoint needs a name");
    if (e.kind != "openai" && e.kind != "azure" && e.kind != "replay" && e.kind != "synthetic") {
        throw ConfigError("endpoint kind must be openai, azure, replay or synthetic");
    }
    if (e.max_concurrency < 1) throw ConfigError("max_concurrency must be >= 1");
    if (e.retry.max_attempts < 1) throw ConfigError("retry.max_attempts must be >= 1");
    if (e.retry.backoff_base_ms < 0) throw ConfigError("retry.backoff_base_ms must be >= 0");
    return e;
}

// ---- prompts ----------------------------------------------------------------

std::string_view to_string(JudgeDimension d) {
    switch (d) {
        case JudgeDimension::text: return "text";
        case JudgeDimension::geometry: return "geometry";
        case JudgeDimension::style: return "style";
    }
    return "text";
}

std::optional<JudgeDimension> parse_dimension(std::string_view text) {
    for (auto d : {JudgeDimension::text, JudgeDimension::geometry, JudgeDimension::style}) {
        if (to_string(d) == text) return d;
    }
    return std::nullopt;
}

std::string_view display_name(JudgeDimension d) {
    switch (d) {
        case JudgeDimension::text: return "text quality";
        case JudgeDimension::geometry: return "layout geometry";
        case JudgeDimension::style: return "style";
    }
    return "style";
}

const std::vector<std::string>& judge_criteria(JudgeDimension d) {
    static const std::vector<std::string> text = {
        "Plain, clear wording",
        "Correct grammar and spelling",
        "Bullets short enough to fit one line",
        "Concise, without filler",
    };
    static const std::vector<std::string> geometry = {
        "Elements aligned to a grid, slide edges and text baselines",
        "Even spacing and margins",
        "Visual balance and a clear hierarchy",
        "Element sizes that reflect their importance",
    };
    static const std::vector<std::string> style = {
        "Font family consistency and readability",
        "Font sizes legible at presentation distance",
        "Sufficient contrast and harmonious colours",
        "Emphasis (bold, italic, underline) used sparingly and consistently",
    };
    switch (d) {
        case JudgeDimension::text: return text;
        case JudgeDimension::geometry: return geometry;
        case JudgeDimension::style: return style;
    }
    return text;
}

JudgeAnchors judge_anchors(Scale scale) {
    JudgeAnchors a;
    a.min = scale.min;
    a.max = scale.max;
    a.mid = scale.mid();
    return a;
}

namespace {

std::string format_number(double v) {
    if (v == std::floor(v)) return std::to_string(static_cast<long long>(v));
    std::ostringstream os;
    os << v;
    return os.str();
}

}  // namespace

std::string extraction_system_prompt(int width, int height) {
    std::ostringstream os;
    os << "Describe every element on this slide: where it sits, how large it is and how it is styled.\n"
       << "The slide measures " << width << " (w) x " << height << " (h) pixels; the image was captured at 72 DPI.\n"
       << "The origin (0,0) is the top-left corner; x grows to the right and y grows downward.\n"
       << "Geometry values are integer pixels unless a field says otherwise.\n\n"
       << "Reply with one JSON object for this slide with the top-level fields\n"
       << "{ size, background, texts:[], rects:[], lines:[], images:[], tables:[] }.\n"
       << "Every required field must be present.\n\n"
       << "Field reference:\n"
       << "- size.w, size.h: slide size in px, always " << width << " and " << height << ".\n"
       << "- background: slide background colour, #RRGGBB.\n"
       << "- texts[]: x, y, w, h (px, top-left of the text box); text; align in {left, center, right, justify, "
          "distributed}; font {name, size (pt), bold, italic, underline, color (#RRGGBB)}.\n"
       << "- rects[]: x, y, w, h (px); rx corner radius (px); fill (#RRGGBB or null); stroke (#RRGGBB); "
          "strokeWidth (pt, 0 for none).\n"
       << "- lines[]: x1, y1, x2, y2 endpoints (px); stroke (#RRGGBB); strokeWidth (pt).\n"
       << "- images[]: x, y, w, h (px); source (short description).\n"
       << "- tables[]: x, y, w, h (px); rows; cols; cells (row-major list of rows*cols strings).\n"
       << "Font sizes and stroke widths are absolute points; all positions and sizes are pixels.";
    return os.str();
}

std::string judge_system_prompt(JudgeDimension d, Scale scale) {
    const JudgeAnchors a = judge_anchors(scale);
    std::ostringstream os;
    os << "[Role]\nYou rate the " << display_name(d) << " of a PowerPoint slide.\n\n"
       << "[Scale]\nReturn ONE integer on the scale " << scale.min << ".." << scale.max << " (inclusive).\n"
       << "Anchors:\n"
       << "- Min (" << format_number(a.min) << "): \"" << a.low_label << "\".\n"
       << "- Mid (" << format_number(a.mid) << "): \"" << a.mid_label << "\".\n"
       << "- Max (" << format_number(a.max) << "): \"" << a.high_label << "\".\n\n"
       << "[How to judge]\nConsider only:\n";
    for (const auto& c : judge_criteria(d)) os << "- " << c << "\n";
    os << "\nReply with the integer alone.";
    return os.str();
}

std::string ordering_system_prompt(std::size_t n_slides) {
    std::ostringstream os;
    os << "You are given the " << n_slides << " slides of one presentation in shuffled order, labelled 1.."
       << n_slides << ".\n"
       << "Put them back into the order in which the presenter would show them.\n"
       << "Reply with a JSON object {\"order\": [...]} listing every label exactly once, first slide first.";
    return os.str();
}

const json& slide_json_schema() {
    static const json schema = [] {
        auto num = json{{"type", "number"}};
        auto color = json{{"type", "string"}, {"pattern", "^#[0-9A-Fa-f]{6}$"}};
        auto box = [&](json extra, std::vector<std::string> required) {
            json props = {{"x", num}, {"y", num}, {"w", num}, {"h", num}};
            props.update(extra);
            for (const char* k : {"x", "y", "w", "h"}) required.emplace_back(k);
            return json{{"type", "object"}, {"properties", props}, {"required", required},
                        {"additionalProperties", false}};
        };
        json font = {{"type", "object"},
                     {"properties",
                      {{"name", {{"type", "string"}}},
                       {"size", num},
                       {"bold", {{"type", "boolean"}}},
                       {"italic", {{"type", "boolean"}}},
                       {"underline", {{"type", "boolean"}}},
                       {"color", color}}},
                     {"required", {"name", "size", "bold", "italic", "underline", "color"}},
                     {"additionalProperties", false}};
        json align = {{"type", "string"}, {"enum", {"left", "center", "right", "justify", "distributed"}}};
        json text = box({{"text", {{"type", "string"}}}, {"align", align}, {"font", font}}, {"text", "align", "font"});
        json rect = box({{"rx", num}, {"fill", {{"type", {"string", "null"}}}}, {"stroke", color}, {"strokeWidth", num}},
                        {"rx", "fill", "stroke", "strokeWidth"});
        json line = {{"type", "object"},
                     {"properties", {{"x1", num}, {"y1", num}, {"x2", num}, {"y2", num}, {"stroke", color},
                                     {"strokeWidth", num}}},
                     {"required", {"x1", "y1", "x2", "y2", "stroke", "strokeWidth"}},
                     {"additionalProperties", false}};
        json image = box({{"source", {{"type", "string"}}}}, {"source"});
        json table = box({{"rows", {{"type", "integer"}}},
                          {"cols", {{"type", "integer"}}},
                          {"cells", {{"type", "array"}, {"items", {{"type", "string"}}}}}},
                         {"rows", "cols", "cells"});
        auto arr = [](json item) { return json{{"type", "array"}, {"items", std::move(item)}}; };
        return json{{"type", "object"},
                    {"properties",
                     {{"size",
                       {{"type", "object"},
                        {"properties", {{"w", num}, {"h", num}}},
                        {"required", {"w", "h"}},
                        {"additionalProperties", false}}},
                      {"background", color},
                      {"texts", arr(text)},
                      {"rects", arr(rect)},
                      {"lines", arr(line)},
                      {"images", arr(image)},
                      {"tables", arr(table)}}},
                    {"required", {"size", "background", "texts", "rects", "lines", "images", "tables"}},
                    {"additionalProperties", false}};
    }();
    return schema;
}

std::string ChatRequest::hash() const { return sha256_hex(body.dump()); }

std::string image_data_uri(std::string_view png_bytes) { return "data:image/png;base64," + base64_encode(png_bytes); }

namespace {

json image_block(std::string_view png) {
    return {{"type", "image_url"}, {"image_url", {{"url", image_data_uri(png)}, {"detail", "auto"}}}};
}

json chat_body(const std::string& system, json user_content, double temperature) {
    return {{"messages",
             json::array({{{"role", "system"}, {"content", system}}, {{"role", "user"}, {"content", std::move(user_content)}}})},
            {"temperature", temperature}};
}

}  // namespace

std::string extraction_key(std::string_view slide_id, int run) {
    return "extract|" + std::string(slide_id) + "|" + std::to_string(run);
}

std::string judge_key(std::string_view subject, JudgeDimension d, Scale scale, int run) {
    return "judge|" + std::string(subject) + "|" + std::string(to_string(d)) + "|" + std::to_string(scale.min) + "-" +
           std::to_string(scale.max) + "|" + std::to_string(run);
}

std::string ordering_key(std::string_view deck_id, int run) {
    return "order|" + std::string(deck_id) + "|" + std::to_string(run);
}

ChatRequest build_extraction_request(std::string_view png_bytes, const std::string& slide_id, int run,
                                     double temperature) {
    ChatRequest r;
    r.task = Task::extract;
    r.key = extraction_key(slide_id, run);
    r.body = chat_body(extraction_system_prompt(), json::array({image_block(png_bytes)}), temperature);
    r.body["response_format"] = {{"type", "json_schema"},
                                 {"json_schema", {{"name", "slide"}, {"schema", slide_json_schema()}, {"strict", false}}}};
    return r;
}

ChatRequest build_judge_request(std::string_view png_bytes, const std::string& subject, JudgeDimension d, Scale scale,
                                int run, double temperature) {
    ChatRequest r;
    r.task = Task::judge;
    r.key = judge_key(subject, d, scale, run);
    r.body = chat_body(judge_system_prompt(d, scale), json::array({image_block(png_bytes)}), temperature);
    return r;
}

ChatRequest build_ordering_request(const std::vector<std::string>& png_bytes, const std::string& deck_id, int run,
                                   double temperature) {
    ChatRequest r;
    r.task = Task::order;
    r.key = ordering_key(deck_id, run);
    json content = json::array();
    for (std::size_t i = 0; i < png_bytes.size(); ++i) {
        content.push_back({{"type", "text"}, {"text", "Slide " + std::to_string(i + 1)}});
        content.push_back(image_block(png_bytes[i]));
    }
    r.body = chat_body(ordering_system_prompt(png_bytes.size()), std::move(content), temperature);
    r.body["response_format"] = {{"type", "json_object"}};
    return r;
}

// ---- reply parsing ----------------------------------------------------------

std::string strip_fence(std::string_view content) {
    auto trim = [](std::string_view s) {
        const auto b = s.find_first_not_of(" \t\r\n");
        if (b == std::string_view::npos) return std::string_view();
        const auto e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    };
    std::string_view s = trim(content);
    if (s.starts_with("```") && s.size() >= 6 && s.ends_with("```")) {
        const auto nl = s.find('\n');
        if (nl != std::string_view::npos && nl < s.size() - 3) s = trim(s.substr(nl + 1, s.size() - 3 - (nl + 1)));
    }
    return std::string(s);
}

std::optional<Slide> parse_extraction_reply(std::string_view content, const std::string& slide_id) {
    const json doc = json::parse(strip_fence(content), nullptr, false);
    if (doc.is_discarded() || !doc.is_object()) return std::nullopt;
    try {
        ValidationOptions opts;
        opts.round_geometry = true;
        Slide s = validate_slide(doc, opts);
        s.slide_id = slide_id;
        return s;
    } catch (const ValidationError&) {
        return std::nullopt;
    }
}

std::optional<int> parse_judge_reply(std::string_view content, Scale scale) {
    const std::string s = strip_fence(content);
    if (s.empty()) return std::nullopt;
    const char* b = s.data();
    const char* e = b + s.size();
    if (*b == '+') ++b;
    int v = 0;
    auto [ptr, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || ptr != e) return std::nullopt;
    if (v < scale.min || v > scale.max) return std::nullopt;
    return v;
}

std::optional<std::vector<int>> parse_ordering_reply(std::string_view content) {
    json doc = json::parse(strip_fence(content), nullptr, false);
    if (doc.is_discarded()) return std::nullopt;
    if (doc.is_object()) {
        if (!doc.contains("order")) return std::nullopt;
        doc = doc.at("order");
    }
    if (!doc.is_array()) return std::nullopt;
    std::vector<int> out;
    for (const auto& v : doc) {
        if (!v.is_number_integer()) return std::nullopt;
        out.push_back(v.get<int>());
    }
    return out;
}

// ---- transport --------------------------------------------------------------

HttpChatClient::HttpChatClient(ModelEndpoint endpoint) : endpoint_(std::move(endpoint)) {
    if (endpoint_.kind != "openai" && endpoint_.kind != "azure") {
        throw ConfigError("http client needs an openai or azure endpoint");
    }
    if (!endpoint_.api_key_env.empty()) {
        if (const char* v = std::getenv(endpoint_.api_key_env.c_str())) key_ = v;
    }
    std::string url = endpoint_.base_url;
    while (url.ends_with('/')) url.pop_back();
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("base_url needs a scheme: " + url);
    const auto path_start = url.find('/', scheme_end + 3);
    scheme_host_ = url.substr(0, path_start);
    path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
}

std::string HttpChatClient::request_path() const {
    if (endpoint_.kind == "azure") {
        return path_prefix_ + "/openai/deployments/" + endpoint_.model +
               "/chat/completions?api-version=" + endpoint_.api_version;
    }
    return path_prefix_ + "/chat/completions";
}

json HttpChatClient::wire_body(const ChatRequest& request) const {
    json body = request.body;
    if (endpoint_.kind != "azure") body["model"] = endpoint_.model;
    body["temperature"] = endpoint_.temperature;
    if (endpoint_.reasoning_effort) {
        body["reasoning_effort"] = *endpoint_.reasoning_effort;
        body.erase("temperature");
    }
    return body;
}

Completion HttpChatClient::complete(const ChatRequest& request) {
    Completion c;
    httplib::Client cli(scheme_host_);
    const auto timeout = std::chrono::milliseconds(static_cast<long long>(endpoint_.timeout_s * 1000));
    cli.set_connection_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
    cli.set_read_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
    cli.set_write_timeout(std::chrono::duration_cast<std::chrono::seconds>(timeout));
    httplib::Headers headers;
    if (!key_.empty()) {
        if (endpoint_.kind == "azure") headers.emplace("api-key", key_);
        else headers.emplace("Authorization", "Bearer " + key_);
    }
    auto res = cli.Post(request_path(), headers, wire_body(request).dump(), "application/json");
    if (!res) {
        c.error = httplib::to_string(res.error());
        return c;
    }
    c.http_status = res->status;
    if (res->status < 200 || res->status >= 300) {
        c.error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 512);
        return c;
    }
    const json doc = json::parse(res->body, nullptr, false);
    try {
        const json& msg = doc.at("choices").at(0).at("message");
        c.content = msg.at("content").is_string() ? msg.at("content").get<std::string>() : std::string();
        c.transport_ok = true;
    } catch (const json::exception&) {
        c.error = "response has no choices[0].message.content";
    }
    return c;
}

ReplayChatClient ReplayChatClient::from_lines(std::string_view jsonl) {
    ReplayChatClient r;
    std::size_t start = 0;
    int line_no = 0;
    while (start < jsonl.size()) {
        auto end = jsonl.find('\n', start);
        if (end == std::string_view::npos) end = jsonl.size();
        const std::string_view line = jsonl.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("key")) {
            throw ConfigError("replay line " + std::to_string(line_no) + " is not a keyed JSON object");
        }
        Completion c;
        if (j.contains("content")) {
            c.transport_ok = true;
            c.http_status = 200;
            c.content = j.at("content").get<std::string>();
        } else {
            c.http_status = j.value("http_status", 0);
            c.error = j.value("error", "canned transport failure");
        }
        r.add(j.at("key").get<std::string>(), std::move(c));
    }
    return r;
}

ReplayChatClient ReplayChatClient::from_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read replay file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_lines(ss.str());
}

void ReplayChatClient::add(std::string key, Completion c) { canned_[std::move(key)] = std::move(c); }

Completion ReplayChatClient::complete(const ChatRequest& request) {
    if (auto it = canned_.find(request.key); it != canned_.end()) return it->second;
    Completion c;
    c.http_status = 404;
    c.error = "no canned response for " + request.key;
    return c;
}

std::string to_replay_line(const std::string& key, const Completion& c) {
    json j = {{"key", key}};
    if (c.transport_ok) {
        j["content"] = c.content;
    } else {
        j["http_status"] = c.http_status;
        j["error"] = c.error;
    }
    return j.dump();
}

RecordingChatClient::RecordingChatClient(std::shared_ptr<ChatClient> inner, std::filesystem::path out)
    : inner_(std::move(inner)), out_(std::move(out)) {}

Completion RecordingChatClient::complete(const ChatRequest& request) {
    Completion c = inner_->complete(request);
    std::lock_guard lock(mu_);
    std::ofstream(out_, std::ios::app | std::ios::binary) << to_replay_line(request.key, c) << '\n';
    return c;
}

std::shared_ptr<ChatClient> make_client(const ModelEndpoint& endpoint) {
    if (endpoint.kind == "openai" || endpoint.kind == "azure") return std::make_shared<HttpChatClient>(endpoint);
    if (endpoint.kind == "replay") {
        return std::make_shared<ReplayChatClient>(ReplayChatClient::from_file(endpoint.base_url));
    }
    throw ConfigError("endpoint '" + endpoint.name + "' of kind " + endpoint.kind + " needs an explicit client");
}

// ---- execution --------------------------------------------------------------

json RunRecord::to_json(bool include_latency) const {
    json j = {{"slide_id", slide_id},
              {"task", to_string(task)},
              {"run", run},
              {"key", key},
              {"request_hash", request_hash},
              {"model", model},
              {"raw_response", raw_response},
              {"status", to_string(status)},
              {"attempts", attempts},
              {"error", error}};
    if (include_latency) j["latency_ms"] = latency_ms;
    return j;
}

RunRecord RunRecord::from_json(const json& j) {
    RunRecord r;
    r.slide_id = j.at("slide_id").get<std::string>();
    r.task = parse_task(j.at("task").get<std::string>()).value_or(Task::extract);
    r.run = j.at("run").get<int>();
    r.key = j.value("key", "");
    r.request_hash = j.value("request_hash", "");
    r.model = j.value("model", "");
    r.raw_response = j.value("raw_response", "");
    r.status = parse_run_status(j.at("status").get<std::string>()).value_or(RunStatus::transport_failure);
    r.attempts = j.value("attempts", 0);
    r.latency_ms = j.value("latency_ms", 0.0);
    r.error = j.value("error", "");
    return r;
}

Gateway::Gateway(ModelEndpoint endpoint, std::shared_ptr<ChatClient> client, Sleeper sleeper)
    : endpoint_(std::move(endpoint)), client_(std::move(client)), sleeper_(std::move(sleeper)) {
    if (!client_) throw ConfigError("gateway needs a client");
    if (!sleeper_) sleeper_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

RunRecord Gateway::execute(const GatewayRequest& request) {
    RunRecord rec;
    rec.slide_id = request.subject;
    rec.task = request.chat.task;
    rec.run = request.run;
    rec.key = request.chat.key;
    rec.request_hash = request.chat.hash();
    rec.model = endpoint_.name;
    const auto start = std::chrono::steady_clock::now();
    for (int attempt = 1; attempt <= endpoint_.retry.max_attempts; ++attempt) {
        rec.attempts = attempt;
        Completion c;
        try {
            c = client_->complete(request.chat);
        } catch (const std::exception& e) {
            c.error = e.what();
        }
        if (c.transport_ok) {
            rec.raw_response = c.content;
            rec.error.clear();
            rec.status = request.accepts && request.accepts(c.content) ? RunStatus::ok : RunStatus::parse_failure;
            break;
        }
        rec.status = RunStatus::transport_failure;
        rec.error = c.error;
        if (!c.retryable() || attempt == endpoint_.retry.max_attempts) break;
        const double delay = endpoint_.retry.backoff_base_ms * std::pow(2.0, attempt - 1);
        sleeper_(std::chrono::milliseconds(static_cast<long long>(delay)));
    }
    rec.latency_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return rec;
}

std::vector<RunRecord> Gateway::execute_all(const std::vector<GatewayRequest>& requests) {
    std::vector<RunRecord> out(requests.size());
    const std::size_t n_workers = std::min(endpoint_.max_concurrency, requests.size());
    if (n_workers <= 1) {
        for (std::size_t i = 0; i < requests.size(); ++i) out[i] = execute(requests[i]);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < requests.size(); i = next++) out[i] = execute(requests[i]);
        });
    }
    pool.clear();
    return out;
}

// ---- task helpers -----------------------------------------------------------

std::vector<ExtractionRun> request_extraction(Gateway& gw, std::string_view png_bytes, const std::string& slide_id,
                                              int n_runs) {
    if (n_runs < 1) throw std::invalid_argument("n_runs must be >= 1");
    std::vector<GatewayRequest> reqs;
    for (int run = 0; run < n_runs; ++run) {
        GatewayRequest g;
        g.chat = build_extraction_request(png_bytes, slide_id, run, gw.endpoint().temperature);
        g.subject = slide_id;
        g.run = run;
        g.accepts = [&](std::string_view c) { return parse_extraction_reply(c, slide_id).has_value(); };
        reqs.push_back(std::move(g));
    }
    std::vector<ExtractionRun> out;
    for (auto& rec : gw.execute_all(reqs)) {
        ExtractionRun r;
        if (rec.status == RunStatus::ok) r.slide = parse_extraction_reply(rec.raw_response, slide_id);
        r.record = std::move(rec);
        out.push_back(std::move(r));
    }
    return out;
}

JudgeRun request_judge_score(Gateway& gw, std::string_view png_bytes, const std::string& subject, JudgeDimension d,
                             Scale scale, int run) {
    GatewayRequest g;
    g.chat = build_judge_request(png_bytes, subject, d, scale, run, gw.endpoint().temperature);
    g.subject = subject;
    g.run = run;
    g.accepts = [scale](std::string_view c) { return parse_judge_reply(c, scale).has_value(); };
    JudgeRun r;
    r.record = gw.execute(g);
    if (r.record.status == RunStatus::ok) r.score = parse_judge_reply(r.record.raw_response, scale);
    return r;
}

OrderingRun request_ordering(Gateway& gw, const std::vector<std::string>& shuffled_png, const std::string& deck_id,
                             int run) {
    GatewayRequest g;
    g.chat = build_ordering_request(shuffled_png, deck_id, run, gw.endpoint().temperature);
    g.subject = deck_id;
    g.run = run;
    g.accepts = [](std::string_view c) { return parse_ordering_reply(c).has_value(); };
    OrderingRun r;
    r.record = gw.execute(g);
    if (r.record.status == RunStatus::ok) r.order = parse_ordering_reply(r.record.raw_response);
    return r;
}

std::map<Task, Accounting> account(const std::vector<RunRecord>& records) {
    std::map<Task, Accounting> out;
    for (const auto& r : records) {
        Accounting& a = out[r.task];
        switch (r.status) {
            case RunStatus::ok: ++a.ok; break;
            case RunStatus::parse_failure: ++a.parse_failure; break;
            case RunStatus::transport_failure: ++a.transport_failure; break;
        }
    }
    return out;
}

}  // namespace slideeval
