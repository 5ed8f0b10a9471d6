#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "slideeval/gateway.hpp"
#include "slideeval/slide_io.hpp"

using namespace slideeval;

namespace {

ModelEndpoint test_endpoint(std::size_t concurrency = 4) {
    ModelEndpoint e;
    e.name = "double";
    e.kind = "synthetic";
    e.max_concurrency = concurrency;
    e.retry.backoff_base_ms = 10;
    return e;
}

Completion ok(std::string content) {
    Completion c;
    c.transport_ok = true;
    c.http_status = 200;
    c.content = std::move(content);
    return c;
}

Completion failed(int status) {
    Completion c;
    c.http_status = status;
    c.error = "fail";
    return c;
}

Slide sample_slide() {
    Slide s;
    TextElement t;
    t.geometry = {10, 20, 300, 40};
    t.content = "Title";
    t.font.name = "Calibri";
    s.texts.push_back(t);
    return s;
}

const std::string kPng = "\x89PNG fake bytes";

}  // namespace

TEST_CASE("extraction prompt names the frame and the fields") {
    const auto p = extraction_system_prompt();
    CHECK(p.find("960 (w) x 540 (h)") != std::string::npos);
    CHECK(p.find("{ size, background, texts:[], rects:[], lines:[], images:[], tables:[] }") != std::string::npos);
    const auto r = build_extraction_request(kPng, "d#1", 0);
    CHECK(r.body["messages"][1]["content"][0]["image_url"]["url"].get<std::string>().starts_with(
        "data:image/png;base64,"));
    CHECK(r.body["response_format"]["type"] == "json_schema");
}

TEST_CASE("identical inputs give identical payload bytes and hash") {
    const auto a = build_extraction_request(kPng, "d#1", 0);
    const auto b = build_extraction_request(kPng, "d#1", 0);
    CHECK(a.body.dump() == b.body.dump());
    CHECK(a.hash() == b.hash());
    CHECK(a.hash().size() == 64);
    CHECK(build_extraction_request(kPng + "x", "d#1", 0).hash() != a.hash());
    CHECK(build_extraction_request(kPng, "d#1", 0, 0.7).hash() != a.hash());
    CHECK(a.key == "extract|d#1|0");
}

TEST_CASE("judge prompt anchors") {
    CHECK(judge_anchors(kFivePoint).mid == 3.0);
    CHECK(judge_anchors(kHundredPoint).mid == 50.5);
    const auto text5 = judge_system_prompt(JudgeDimension::text, kFivePoint);
    CHECK(text5.find("Mid (3): \"acceptable\"") != std::string::npos);
    CHECK(text5.find("Return ONE integer on the scale 1..5") != std::string::npos);
    const auto geo100 = judge_system_prompt(JudgeDimension::geometry, kHundredPoint);
    CHECK(geo100.find("1..100") != std::string::npos);
    CHECK(geo100.find("Mid (50.5)") != std::string::npos);
    CHECK(geo100.find("\"very poor\"") != std::string::npos);
    CHECK(geo100.find("\"excellent\"") != std::string::npos);
    const auto style = judge_system_prompt(JudgeDimension::style, kFivePoint);
    CHECK(style.find("Font family consistency") != std::string::npos);
    CHECK(judge_key("v", JudgeDimension::style, kHundredPoint, 2) == "judge|v|style|1-100|2");
}

TEST_CASE("judge replies") {
    CHECK(parse_judge_reply("4", kFivePoint) == 4);
    CHECK(parse_judge_reply(" 5\n", kFivePoint) == 5);
    CHECK_FALSE(parse_judge_reply("0", kFivePoint));
    CHECK_FALSE(parse_judge_reply("6", kFivePoint));
    CHECK_FALSE(parse_judge_reply("good", kFivePoint));
    CHECK_FALSE(parse_judge_reply("3.5", kFivePoint));
    CHECK_FALSE(parse_judge_reply("", kFivePoint));
    CHECK(parse_judge_reply("100", kHundredPoint) == 100);
}

TEST_CASE("extraction replies") {
    const Slide s = sample_slide();
    const auto parsed = parse_extraction_reply(serialize(s), "x#1");
    REQUIRE(parsed);
    CHECK(parsed->slide_id == "x#1");
    CHECK(parsed->texts == s.texts);
    CHECK(parse_extraction_reply("```json\n" + serialize(s) + "```", "x#1"));
    CHECK_FALSE(parse_extraction_reply("The slide has a title and a chart.", "x#1"));
    CHECK_FALSE(parse_extraction_reply("{\"size\": {\"w\": 960, \"h\": 540}}", "x#1"));
    CHECK_FALSE(parse_extraction_reply("[]", "x#1"));
}

TEST_CASE("ordering replies and length ratio") {
    std::vector<int> truth(23);
    for (int i = 0; i < 23; ++i) truth[static_cast<std::size_t>(i)] = i + 1;
    const auto full = parse_ordering_reply(nlohmann::json{{"order", truth}}.dump());
    REQUIRE(full);
    CHECK(rank_metrics(*full, truth).length_ratio == 1.0);
    const auto partial = parse_ordering_reply("[1,2,3,4,5,6,7,8,9,10]");
    REQUIRE(partial);
    CHECK(rank_metrics(*partial, truth).length_ratio == doctest::Approx(10.0 / 23.0));
    const auto dup = parse_ordering_reply("[1,1,2]");
    REQUIRE(dup);
    CHECK_THROWS_AS(rank_metrics(*dup, std::vector<int>{1, 2, 3}), InvalidPermutation);
    CHECK_FALSE(parse_ordering_reply("first the title, then..."));
    CHECK_FALSE(parse_ordering_reply("[1, \"2\"]"));
}

TEST_CASE("n_runs gives exactly that many records") {
    const Slide s = sample_slide();
    int calls = 0;
    auto client = std::make_shared<FunctionChatClient>([&](const ChatRequest& r) {
        ++calls;
        return r.key.ends_with("|1") ? ok("not json") : ok(serialize(s));
    });
    Gateway gw(test_endpoint(1), client);
    const auto runs = request_extraction(gw, kPng, "d#1", 3);
    REQUIRE(runs.size() == 3);
    CHECK(calls == 3);
    CHECK(runs[0].slide);
    CHECK(runs[1].record.status == RunStatus::parse_failure);
    CHECK_FALSE(runs[1].slide);
    CHECK(runs[2].record.run == 2);
    const auto acc = account({runs[0].record, runs[1].record, runs[2].record});
    CHECK(acc.at(Task::extract).ok == 2);
    CHECK(acc.at(Task::extract).parse_failure == 1);
}

TEST_CASE("retries cover transport and 429 failures only") {
    std::vector<std::chrono::milliseconds> sleeps;
    auto sleeper = [&](std::chrono::milliseconds d) { sleeps.push_back(d); };

    SUBCASE("429 then success") {
        int n = 0;
        auto client = std::make_shared<FunctionChatClient>([&](const ChatRequest&) { return ++n < 3 ? failed(429) : ok("4"); });
        Gateway gw(test_endpoint(), client, sleeper);
        const auto r = request_judge_score(gw, kPng, "v", JudgeDimension::text, kFivePoint);
        CHECK(r.score == 4);
        CHECK(r.record.attempts == 3);
        CHECK(sleeps == std::vector<std::chrono::milliseconds>{std::chrono::milliseconds(10), std::chrono::milliseconds(20)});
    }
    SUBCASE("exhaustion is a transport failure") {
        auto client = std::make_shared<FunctionChatClient>([](const ChatRequest&) { return failed(0); });
        Gateway gw(test_endpoint(), client, sleeper);
        const auto r = request_judge_score(gw, kPng, "v", JudgeDimension::text, kFivePoint);
        CHECK(r.record.status == RunStatus::transport_failure);
        CHECK(r.record.attempts == 3);
    }
    SUBCASE("client errors are terminal") {
        auto client = std::make_shared<FunctionChatClient>([](const ChatRequest&) { return failed(400); });
        Gateway gw(test_endpoint(), client, sleeper);
        CHECK(request_judge_score(gw, kPng, "v", JudgeDimension::text, kFivePoint).record.attempts == 1);
    }
    SUBCASE("parse failures are never retried") {
        int n = 0;
        auto client = std::make_shared<FunctionChatClient>([&](const ChatRequest&) {
            ++n;
            return ok("good");
        });
        Gateway gw(test_endpoint(), client, sleeper);
        const auto r = request_judge_score(gw, kPng, "v", JudgeDimension::text, kFivePoint);
        CHECK(r.record.status == RunStatus::parse_failure);
        CHECK(n == 1);
        CHECK(sleeps.empty());
    }
}

TEST_CASE("in-flight requests never exceed the cap") {
    for (std::size_t cap : {1u, 3u, 8u}) {
        std::atomic<int> in_flight{0}, peak{0};
        auto client = std::make_shared<FunctionChatClient>([&](const ChatRequest&) {
            const int now = ++in_flight;
            int p = peak.load();
            while (now > p && !peak.compare_exchange_weak(p, now)) {
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(2));
            --in_flight;
            return ok("3");
        });
        Gateway gw(test_endpoint(cap), client);
        std::vector<GatewayRequest> reqs;
        for (int i = 0; i < 40; ++i) {
            GatewayRequest g;
            g.chat = build_judge_request(kPng, "v" + std::to_string(i), JudgeDimension::style, kFivePoint, 0);
            g.subject = "v" + std::to_string(i);
            g.accepts = [](std::string_view c) { return parse_judge_reply(c, kFivePoint).has_value(); };
            reqs.push_back(std::move(g));
        }
        const auto recs = gw.execute_all(reqs);
        CHECK(peak.load() <= static_cast<int>(cap));
        REQUIRE(recs.size() == 40);
        CHECK(recs[17].slide_id == "v17");
        CHECK(account(recs).at(Task::judge).total() == 40);
    }
}

TEST_CASE("replay endpoint") {
    auto replay = std::make_shared<ReplayChatClient>(ReplayChatClient::from_lines(
        "{\"key\":\"judge|v|text|1-5|0\",\"content\":\"2\"}\n"
        "\n"
        "{\"key\":\"judge|w|text|1-5|0\",\"http_status\":503,\"error\":\"busy\"}\n"));
    CHECK(replay->size() == 2);
    Gateway gw(test_endpoint(), replay, [](std::chrono::milliseconds) {});
    CHECK(request_judge_score(gw, kPng, "v", JudgeDimension::text, kFivePoint).score == 2);
    const auto busy = request_judge_score(gw, kPng, "w", JudgeDimension::text, kFivePoint);
    CHECK(busy.record.status == RunStatus::transport_failure);
    CHECK(busy.record.attempts == 3);
    const auto missing = request_judge_score(gw, kPng, "zz", JudgeDimension::text, kFivePoint);
    CHECK(missing.record.status == RunStatus::transport_failure);
    CHECK(missing.record.attempts == 1);
    CHECK_THROWS_AS(ReplayChatClient::from_lines("not json\n"), ConfigError);
    CHECK(to_replay_line("k", ok("x")) == R"({"content":"x","key":"k"})");
}

TEST_CASE("credentials stay out of serialized endpoints and records") {
    ::setenv("SLIDEEVAL_TEST_SECRET", "sk-very-secret", 1);
    ModelEndpoint e;
    e.name = "live";
    e.base_url = "https://example.invalid/v1";
    e.model = "m";
    e.api_key_env = "SLIDEEVAL_TEST_SECRET";
    const std::string dumped = e.to_json().dump();
    CHECK(dumped.find("sk-very-secret") == std::string::npos);
    CHECK(dumped.find("SLIDEEVAL_TEST_SECRET") != std::string::npos);
    const auto back = ModelEndpoint::from_json(e.to_json());
    CHECK(back.api_key_env == e.api_key_env);
    HttpChatClient http(e);
    const auto req = build_judge_request(kPng, "v", JudgeDimension::text, kFivePoint, 0);
    CHECK(http.wire_body(req).dump().find("sk-very-secret") == std::string::npos);
    CHECK(http.wire_body(req)["model"] == "m");
    CHECK(http.request_path() == "/v1/chat/completions");
    e.kind = "azure";
    e.base_url = "https://res.example.invalid";
    CHECK(HttpChatClient(e).request_path() == "/openai/deployments/m/chat/completions?api-version=2024-06-01");
    CHECK_THROWS_AS(ModelEndpoint::from_json({{"name", "x"}, {"api_key", "sk"}}), ConfigError);
    ::unsetenv("SLIDEEVAL_TEST_SECRET");
}

TEST_CASE("run records roundtrip") {
    RunRecord r;
    r.slide_id = "d#1";
    r.task = Task::order;
    r.run = 2;
    r.status = RunStatus::parse_failure;
    r.raw_response = "nope";
    const auto back = RunRecord::from_json(r.to_json());
    CHECK(back.to_json() == r.to_json());
    CHECK_FALSE(r.to_json(false).contains("latency_ms"));
}

#include <httplib.h>

TEST_CASE("http client speaks chat completions to a loopback server") {
    httplib::Server server;
    std::string seen_auth, seen_model;
    int hits = 0;
    server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
        ++hits;
        seen_auth = req.get_header_value("Authorization");
        seen_model = nlohmann::json::parse(req.body).value("model", "");
        if (hits == 1) {
            res.status = 503;
            return;
        }
        res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"5"}}]})", "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    ::setenv("SLIDEEVAL_LOOPBACK_KEY", "k-123", 1);
    ModelEndpoint e;
    e.name = "loop";
    e.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
    e.model = "vision-model";
    e.api_key_env = "SLIDEEVAL_LOOPBACK_KEY";
    e.retry.backoff_base_ms = 1;
    Gateway gw(e, std::make_shared<HttpChatClient>(e));
    const auto r = request_judge_score(gw, kPng, "v", JudgeDimension::geometry, kFivePoint);
    server.stop();
    t.join();
    ::unsetenv("SLIDEEVAL_LOOPBACK_KEY");

    CHECK(r.score == 5);
    CHECK(r.record.attempts == 2);
    CHECK(hits == 2);
    CHECK(seen_auth == "Bearer k-123");
    CHECK(seen_model == "vision-model");
    CHECK(r.record.to_json().dump().find("k-123") == std::string::npos);
}
