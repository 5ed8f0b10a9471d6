#include <cmath>
#include <set>

#include "slideeval/pipeline.hpp"
#include "slideeval/slide_io.hpp"

namespace slideeval {

using nlohmann::json;

Slide jittered_oracle(const Slide& truth, double s, std::uint64_t seed) {
    PerturbationConfig cfg;
    cfg.base_seed = seed;
    Slide out = truth;
    for (Axis a : kAllAxes) out = perturb(out, a, s, cfg).slide;
    out.slide_id = truth.slide_id;
    return out;
}

namespace {

struct Subject {
    std::string id;
    int run = 0;
};

/// Splits "<task>|<subject...>|<run>" keys; the subject may itself contain '|'.
Subject split_key(const ChatRequest& r) {
    const auto first = r.key.find('|');
    const auto last = r.key.rfind('|');
    Subject s;
    if (first == std::string::npos || last == first) return s;
    s.id = r.key.substr(first + 1, last - first - 1);
    s.run = std::stoi(r.key.substr(last + 1));
    return s;
}

Completion reply(std::string content) {
    Completion c;
    c.transport_ok = true;
    c.http_status = 200;
    c.content = std::move(content);
    return c;
}

Completion unknown(const std::string& what) {
    Completion c;
    c.http_status = 404;
    c.error = "synthetic predictor has no " + what;
    return c;
}

std::string document(Slide s) {
    s.slide_id.clear();
    return to_json(s).dump();
}

class SyntheticClient : public ChatClient {
public:
    SyntheticClient(std::string model, std::shared_ptr<const SyntheticWorld> world)
        : world_(std::move(world)) {
        const auto colon = model.find(':');
        name_ = model.substr(0, colon);
        if (colon != std::string::npos) {
            try {
                jitter_ = std::stod(model.substr(colon + 1));
            } catch (const std::exception&) {
                throw ConfigError("bad synthetic severity in '" + model + "'");
            }
        }
        static const std::set<std::string> known = {"oracle", "empty", "jittered-oracle", "constant", "identity"};
        if (!known.contains(name_)) throw ConfigError("unknown synthetic predictor '" + model + "'");
        if (!(jitter_ >= 0.0 && jitter_ <= 1.0)) throw ConfigError("synthetic severity must lie in [0, 1]");
    }

    Completion complete(const ChatRequest& r) override {
        const Subject subj = split_key(r);
        switch (r.task) {
            case Task::extract: return extract(subj);
            case Task::judge: return judge(r, subj);
            case Task::order: return order(subj);
        }
        return unknown("task");
    }

private:
    Completion extract(const Subject& subj) const {
        auto it = world_->slides.find(subj.id);
        if (it == world_->slides.end()) return unknown("slide " + subj.id);
        if (name_ == "oracle") return reply(document(it->second));
        if (name_ == "empty") {
            Slide blank;
            blank.background = it->second.background;
            return reply(document(blank));
        }
        if (name_ == "jittered-oracle") {
            return reply(document(jittered_oracle(it->second, jitter_, static_cast<std::uint64_t>(subj.run) + 1)));
        }
        return unknown("extraction mode " + name_);
    }

    Completion judge(const ChatRequest& r, const Subject& subj) const {
        // judge keys carry "<variant>|<dimension>|<min>-<max>" as the subject
        const auto bar = subj.id.rfind('|');
        const auto bar2 = bar == std::string::npos ? std::string::npos : subj.id.rfind('|', bar - 1);
        if (bar2 == std::string::npos) return unknown("judge subject in " + r.key);
        const std::string variant = subj.id.substr(0, bar2);
        const std::string scale_text = subj.id.substr(bar + 1);
        const auto dash = scale_text.find('-');
        const Scale scale{std::stoi(scale_text.substr(0, dash)), std::stoi(scale_text.substr(dash + 1))};
        if (name_ == "constant") return reply(std::to_string(static_cast<int>(std::lround(scale.mid()))));
        if (name_ != "oracle") return unknown("judge mode " + name_);
        auto it = world_->severities.find(variant);
        if (it == world_->severities.end()) return unknown("variant " + variant);
        const double raw = scale.max - it->second * (scale.max - scale.min);
        return reply(std::to_string(static_cast<int>(std::lround(raw))));
    }

    Completion order(const Subject& subj) const {
        auto it = world_->truth_labels.find(subj.id);
        if (it == world_->truth_labels.end()) return unknown("deck " + subj.id);
        if (name_ == "empty") return reply(R"({"order": []})");
        if (name_ == "oracle") return reply(json{{"order", it->second}}.dump());
        if (name_ == "identity") {
            std::vector<int> labels(it->second.size());
            for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i) + 1;
            return reply(json{{"order", labels}}.dump());
        }
        return unknown("ordering mode " + name_);
    }

    std::shared_ptr<const SyntheticWorld> world_;
    std::string name_;
    double jitter_ = 0.3;
};

}  // namespace

std::shared_ptr<ChatClient> make_synthetic_client(const std::string& model, std::shared_ptr<const SyntheticWorld> world) {
    return std::make_shared<SyntheticClient>(model, std::move(world));
}

}  // namespace slideeval
