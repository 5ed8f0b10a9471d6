#include "slideeval/perturb.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "slideeval/color.hpp"
#include "slideeval/fonts.hpp"
#include "slideeval/slide_io.hpp"
#include "slideeval/utf8.hpp"

using nlohmann::json;

namespace slideeval {

std::string_view to_string(Axis a) {
    switch (a) {
        case Axis::geometry: return "geometry";
        case Axis::text: return "text";
        case Axis::style: return "style";
    }
    return "geometry";
}

std::optional<Axis> parse_axis(std::string_view text) {
    for (Axis a : kAllAxes) {
        if (text == to_string(a)) return a;
    }
    return std::nullopt;
}

void PerturbationConfig::validate() const {
    for (double p : {pi_geo, pi_txt, pi_sty}) {
        if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("per-element probabilities must lie in [0, 1]");
    }
    if (max_inserts < 1) throw std::invalid_argument("max_inserts must be >= 1");
    if (font_pool.size() < 2) throw std::invalid_argument("font pool needs at least two families");
    if (palette.empty() || filler.empty()) throw std::invalid_argument("palette and filler pools must be non-empty");
    for (const auto& c : palette) ColorHex::from_string(c);
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::string_view slide_id, Axis axis, double severity) {
    std::string bytes;
    auto put_u64 = [&](std::uint64_t v) {
        for (int i = 0; i < 8; ++i) bytes += static_cast<char>((v >> (8 * i)) & 0xFF);
    };
    put_u64(base_seed);
    bytes += slide_id;
    bytes += '\0';
    bytes += to_string(axis);
    bytes += '\0';
    put_u64(static_cast<std::uint64_t>(std::llround(severity * 1e6)));
    return splitmix64(fnv1a64(bytes));
}

namespace schedule {
double sigma_translate(double s) { return 0.04 + 0.16 * s; }
double sigma_log_scale(double s) { return 0.12 + 0.55 * s; }
double p_extreme(double s) { return 0.20 * s; }
double p_reposition(double s) { return 0.10 * s; }
double p_collapse(double s) { return 0.08 * s; }
double p_char(double s) { return 0.02 + (0.25 - 0.02) * s; }
double p_drop(double s) { return 0.18 * s; }
double p_insert(double s) { return 0.35 * s; }
int max_insert_count(double s, int max_inserts) {
    return std::min(max_inserts, 1 + static_cast<int>(std::floor(3.0 * s)));
}
double insert_w_hi(double s) { return 0.35 + 0.35 * s; }
double insert_h_hi(double s) { return 0.22 + 0.28 * s; }
double insert_font_size(double s) { return 14.0 * (1.0 + s); }
double p_insert_emphasis(double s) { return 0.10 * s; }
double p_family(double s) { return 0.20 + 0.60 * s; }
double sigma_size(double s) { return 0.45 * s; }
double p_size_extreme(double s) { return 0.25 * s; }
double p_toggle(double s) { return 0.20 * s; }
double p_inject(double s) { return 0.30 * s; }
double hue_jitter(double s) { return 30.0 * s; }
double lightness_jitter(double s) { return 0.25 * s; }
double saturation_jitter(double s) { return 0.20 * s; }
double p_low_contrast(double s) { return 0.25 * s; }
double alpha_low_contrast(double s) { return 0.25 + 0.65 * s; }
double p_background(double s) { return 0.20 * s; }

std::vector<Entry> all() {
    return {{"sigma_translate", sigma_translate},
            {"sigma_log_scale", sigma_log_scale},
            {"p_extreme", p_extreme},
            {"p_reposition", p_reposition},
            {"p_collapse", p_collapse},
            {"p_char", p_char},
            {"p_drop", p_drop},
            {"p_insert", p_insert},
            {"max_insert_count", [](double s) { return static_cast<double>(max_insert_count(s, 3)); }},
            {"insert_w_hi", insert_w_hi},
            {"insert_h_hi", insert_h_hi},
            {"insert_font_size", insert_font_size},
            {"p_insert_emphasis", p_insert_emphasis},
            {"p_family", p_family},
            {"sigma_size", sigma_size},
            {"p_size_extreme", p_size_extreme},
            {"p_toggle", p_toggle},
            {"p_inject", p_inject},
            {"hue_jitter", hue_jitter},
            {"lightness_jitter", lightness_jitter},
            {"saturation_jitter", saturation_jitter},
            {"p_low_contrast", p_low_contrast},
            {"alpha_low_contrast", alpha_low_contrast},
            {"p_background", p_background}};
}
}  // namespace schedule

std::u32string_view keyboard_neighbors(char32_t c) {
    static const std::pair<char32_t, std::u32string_view> kMap[] = {
        {U'0', U"9"},     {U'1', U"2"},      {U'2', U"13"},     {U'3', U"24"},    {U'4', U"35"},
        {U'5', U"46"},    {U'6', U"57"},     {U'7', U"68"},     {U'8', U"79"},    {U'9', U"80"},
        {U'a', U"qwsz"},  {U'b', U"vghn"},   {U'c', U"xdfv"},   {U'd', U"erfsxc"}, {U'e', U"wrsd"},
        {U'f', U"rtdgcv"}, {U'g', U"tyfhvb"}, {U'h', U"yugjbn"}, {U'i', U"uojk"},  {U'j', U"uihknm"},
        {U'k', U"iojlm"}, {U'l', U"opk"},    {U'm', U"njk"},    {U'n', U"bhjm"},  {U'o', U"ipkl"},
        {U'p', U"ol"},    {U'q', U"wa"},     {U'r', U"etdf"},   {U's', U"weadzx"}, {U't', U"ryfg"},
        {U'u', U"yihj"},  {U'v', U"cfgb"},   {U'w', U"qeas"},   {U'x', U"zsdc"},  {U'y', U"tugh"},
        {U'z', U"asx"},
    };
    for (const auto& [k, v] : kMap) {
        if (k == c) return v;
    }
    return {};
}

namespace {

constexpr std::u32string_view kLetters = U"abcdefghijklmnopqrstuvwxyz";

bool is_upper_ascii(char32_t c) { return c >= U'A' && c <= U'Z'; }

char32_t neighbor_of(char32_t c, CounterRng& rng) {
    const char32_t lower = is_upper_ascii(c) ? c + 32 : c;
    auto pool = keyboard_neighbors(lower);
    if (pool.empty()) pool = kLetters;
    const char32_t pick = pool[rng.index(pool.size())];
    return is_upper_ascii(c) && pick >= U'a' && pick <= U'z' ? pick - 32 : pick;
}

std::string_view op_name(TextEdit::Op op) {
    switch (op) {
        case TextEdit::Op::substitute: return "substitute";
        case TextEdit::Op::remove: return "delete";
        case TextEdit::Op::insert: return "insert";
        case TextEdit::Op::swap: return "swap";
    }
    return "substitute";
}

TextEdit::Op parse_op(std::string_view s) {
    for (auto op : {TextEdit::Op::substitute, TextEdit::Op::remove, TextEdit::Op::insert, TextEdit::Op::swap}) {
        if (op_name(op) == s) return op;
    }
    throw std::invalid_argument("unknown edit op " + std::string(s));
}

std::vector<TextEdit> draw_char_noise(std::string_view text, double p, CounterRng& rng) {
    const std::u32string cps = utf8::decode(text);
    std::vector<TextEdit> edits;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        if (!rng.bernoulli(p)) continue;
        const double u = rng.uniform();
        TextEdit e;
        e.pos = i;
        if (u < 0.50) {
            e.op = TextEdit::Op::substitute;
            e.ch = neighbor_of(cps[i], rng);
        } else if (u < 0.70) {
            e.op = TextEdit::Op::remove;
        } else if (u < 0.85) {
            e.op = TextEdit::Op::insert;
            e.ch = neighbor_of(cps[i], rng);
        } else {
            if (i + 1 >= cps.size()) continue;
            e.op = TextEdit::Op::swap;
            edits.push_back(e);
            ++i;  // the swapped partner is consumed
            continue;
        }
        edits.push_back(e);
    }
    return edits;
}

BoxGeometry* box_of_family(Slide& s, ElementKind kind, std::size_t index) {
    switch (kind) {
        case ElementKind::text: return &s.texts.at(index).geometry;
        case ElementKind::rect: return &s.rects.at(index).geometry;
        case ElementKind::image: return &s.images.at(index).geometry;
        case ElementKind::table: return &s.tables.at(index).geometry;
        case ElementKind::line: break;
    }
    throw std::invalid_argument("lines carry no box geometry");
}

double param(const PerturbationEvent& e, const char* key) {
    auto it = e.params.find(key);
    if (it == e.params.end()) throw std::invalid_argument("event " + e.op + " lacks parameter " + key);
    return it->second;
}

ColorHex jitter_hls(const ColorHex& c, double dh, double dl, double ds) {
    Hls h = rgb_to_hls(c.rgb());
    h.h = std::fmod(h.h + dh, 360.0);
    if (h.h < 0.0) h.h += 360.0;
    h.l = std::clamp(h.l + dl, 0.0, 1.0);
    h.s = std::clamp(h.s + ds, 0.0, 1.0);
    return ColorHex(hls_to_rgb(h));
}

/// Replay state: the clean input plus texts marked for removal.
struct ApplyContext {
    const Slide& clean;
    bool allow_clipping;
    std::vector<bool> dropped;
};

void apply_event(Slide& s, const PerturbationEvent& e, ApplyContext& ctx) {
    const double W = s.width, H = s.height;
    const std::string& op = e.op;
    if (op == "translate") {
        BoxGeometry* b = box_of_family(s, e.kind, e.index);
        b->x += param(e, "dx");
        b->y += param(e, "dy");
    } else if (op == "scale") {
        BoxGeometry* b = box_of_family(s, e.kind, e.index);
        b->w *= param(e, "eta_w");
        b->h *= param(e, "eta_h");
    } else if (op == "extreme") {
        BoxGeometry* b = box_of_family(s, e.kind, e.index);
        b->w *= param(e, "r");
        b->h *= param(e, "r");
    } else if (op == "reposition") {
        BoxGeometry* b = box_of_family(s, e.kind, e.index);
        b->x = param(e, "x");
        b->y = param(e, "y");
    } else if (op == "collapse") {
        BoxGeometry* b = box_of_family(s, e.kind, e.index);
        (param(e, "dim") == 0.0 ? b->w : b->h) = param(e, "value");
    } else if (op == "clamp") {
        BoxGeometry* b = box_of_family(s, e.kind, e.index);
        b->w = std::max(1.0, b->w);
        b->h = std::max(1.0, b->h);
        if (!ctx.allow_clipping) {
            b->w = std::min(b->w, W);
            b->h = std::min(b->h, H);
            b->x = std::clamp(b->x, 0.0, W - b->w);
            b->y = std::clamp(b->y, 0.0, H - b->h);
        }
    } else if (op == "drop") {
        ctx.dropped.at(e.index) = true;
    } else if (op == "char_noise") {
        auto& t = s.texts.at(e.index);
        t.content = apply_edits(t.content, e.edits);
    } else if (op == "restore_numbers") {
        auto& t = s.texts.at(e.index);
        t.content = restore_numbers(ctx.clean.texts.at(e.index).content, t.content);
    } else if (op == "insert") {
        TextElement t;
        t.geometry = {param(e, "x"), param(e, "y"), param(e, "w"), param(e, "h")};
        t.content = e.value;
        t.font.name = "Calibri";
        t.font.size = param(e, "size");
        t.font.bold = param(e, "bold") != 0.0;
        t.font.italic = param(e, "italic") != 0.0;
        t.font.underline = param(e, "underline") != 0.0;
        s.texts.push_back(std::move(t));
        ctx.dropped.push_back(false);
    } else if (op == "family") {
        s.texts.at(e.index).font.name = e.value;
    } else if (op == "size_jitter" || op == "size_extreme") {
        auto& f = s.texts.at(e.index).font;
        f.size = std::clamp(f.size * param(e, "factor"), 6.0, 120.0);
    } else if (op == "toggle") {
        auto& f = s.texts.at(e.index).font;
        if (e.value == "bold") f.bold = !f.bold;
        else if (e.value == "italic") f.italic = !f.italic;
        else if (e.value == "underline") f.underline = !f.underline;
        else throw std::invalid_argument("unknown toggle " + e.value);
    } else if (op == "inject_color") {
        s.texts.at(e.index).font.color = ColorHex::from_string(e.value);
    } else if (op == "hls_jitter") {
        auto& c = s.texts.at(e.index).font.color;
        c = jitter_hls(c, param(e, "dh"), param(e, "dl"), param(e, "ds"));
    } else if (op == "low_contrast") {
        auto& c = s.texts.at(e.index).font.color;
        c = ColorHex(blend(c.rgb(), ctx.clean.background.rgb(), param(e, "alpha")));
    } else if (op == "background_jitter") {
        s.background = jitter_hls(s.background, param(e, "dh"), param(e, "dl"), param(e, "ds"));
    } else {
        throw std::invalid_argument("unknown perturbation op " + op);
    }
}

void finish(Slide& s, ApplyContext& ctx) {
    if (std::none_of(ctx.dropped.begin(), ctx.dropped.end(), [](bool d) { return d; })) return;
    std::vector<TextElement> kept;
    for (std::size_t i = 0; i < s.texts.size(); ++i) {
        if (!ctx.dropped[i]) kept.push_back(std::move(s.texts[i]));
    }
    s.texts = std::move(kept);
}

/// Draws events through `draw`, applying each one as it is produced so later
/// draws see the current state.
class Session {
public:
    Session(const Slide& clean, Axis axis, double s, CounterRng& rng, const PerturbationConfig& cfg)
        : out_{clean, {}}, ctx_{clean, cfg.allow_clipping, std::vector<bool>(clean.texts.size(), false)} {
        out_.record.slide_id = clean.slide_id;
        out_.record.axis = axis;
        out_.record.severity = s;
        out_.record.seed = rng.seed();
        out_.record.allow_clipping = cfg.allow_clipping;
        out_.record.preserve_numbers = cfg.preserve_numbers;
    }

    void emit(PerturbationEvent e) {
        apply_event(out_.slide, e, ctx_);
        out_.record.events.push_back(std::move(e));
    }

    Slide& slide() { return out_.slide; }

    Perturbed done() {
        finish(out_.slide, ctx_);
        return std::move(out_);
    }

private:
    Perturbed out_;
    ApplyContext ctx_;
};

void check_severity(double s) {
    if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("severity must lie in [0, 1]");
}

Perturbed unchanged(const Slide& slide, Axis axis, double s, CounterRng& rng, const PerturbationConfig& cfg) {
    return Session(slide, axis, s, rng, cfg).done();
}

PerturbationEvent event(std::string op, ElementKind kind, std::size_t index, std::map<std::string, double> params = {},
                        std::string value = {}) {
    PerturbationEvent e;
    e.op = std::move(op);
    e.kind = kind;
    e.index = index;
    e.params = std::move(params);
    e.value = std::move(value);
    return e;
}

}  // namespace

std::string apply_edits(std::string_view text, std::span<const TextEdit> edits) {
    const std::u32string cps = utf8::decode(text);
    std::u32string out;
    std::size_t k = 0;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        while (k < edits.size() && edits[k].pos < i) ++k;
        if (k == edits.size() || edits[k].pos != i) {
            out += cps[i];
            continue;
        }
        const TextEdit& e = edits[k];
        switch (e.op) {
            case TextEdit::Op::substitute: out += e.ch; break;
            case TextEdit::Op::remove: break;
            case TextEdit::Op::insert:
                out += cps[i];
                out += e.ch;
                break;
            case TextEdit::Op::swap:
                if (i + 1 < cps.size()) {
                    out += cps[i + 1];
                    out += cps[i];
                    ++i;
                } else {
                    out += cps[i];
                }
                break;
        }
    }
    return utf8::encode(out);
}

namespace {

struct Run {
    std::size_t begin, end;
};

std::vector<Run> find_runs(std::string_view t) {
    auto digit = [&](std::size_t i) { return i < t.size() && t[i] >= '0' && t[i] <= '9'; };
    std::vector<Run> runs;
    std::size_t i = 0;
    while (i < t.size()) {
        if (!digit(i)) {
            ++i;
            continue;
        }
        const std::size_t b = i;
        while (digit(i)) ++i;
        if (i < t.size() && t[i] == '.' && digit(i + 1)) {
            ++i;
            while (digit(i)) ++i;
        }
        runs.push_back({b, i});
    }
    return runs;
}

}  // namespace

std::vector<std::string> numeric_runs(std::string_view text) {
    std::vector<std::string> out;
    for (const Run& r : find_runs(text)) out.emplace_back(text.substr(r.begin, r.end - r.begin));
    return out;
}

std::string restore_numbers(std::string_view original, std::string_view noised) {
    const auto want = numeric_runs(original);
    const auto have = find_runs(noised);
    std::string out;
    std::size_t cursor = 0;
    for (std::size_t k = 0; k < have.size() && k < want.size(); ++k) {
        out.append(noised.substr(cursor, have[k].begin - cursor));
        out += want[k];
        cursor = have[k].end;
    }
    out.append(noised.substr(cursor));
    for (std::size_t k = have.size(); k < want.size(); ++k) {
        if (!out.empty() && out.back() != ' ') out += ' ';
        out += want[k];
    }
    return out;
}

Perturbed perturb_geometry(const Slide& slide, double s, CounterRng& rng, const PerturbationConfig& cfg) {
    check_severity(s);
    if (s <= kNoOpSeverity) return unchanged(slide, Axis::geometry, s, rng, cfg);
    Session session(slide, Axis::geometry, s, rng, cfg);
    const double W = slide.width, H = slide.height;
    for (ElementKind kind : {ElementKind::text, ElementKind::rect, ElementKind::image, ElementKind::table}) {
        for (std::size_t i = 0; i < slide.count(kind); ++i) {
            if (!rng.bernoulli(cfg.pi_geo)) continue;
            const double dx = rng.normal(0.0, schedule::sigma_translate(s) * W);
            const double dy = rng.normal(0.0, schedule::sigma_translate(s) * H);
            session.emit(event("translate", kind, i, {{"dx", dx}, {"dy", dy}}));
            const double eta_w = std::exp(rng.normal(0.0, schedule::sigma_log_scale(s)));
            const double eta_h = std::exp(rng.normal(0.0, schedule::sigma_log_scale(s)));
            session.emit(event("scale", kind, i, {{"eta_w", eta_w}, {"eta_h", eta_h}}));
            if (rng.bernoulli(schedule::p_extreme(s))) {
                const double r = rng.bernoulli(0.5) ? rng.uniform(0.15, 0.50) : rng.uniform(1.5, 10.0);
                session.emit(event("extreme", kind, i, {{"r", r}}));
            }
            if (rng.bernoulli(schedule::p_reposition(s))) {
                const BoxGeometry& b = *box_of_family(session.slide(), kind, i);
                const double x = rng.uniform(0.0, std::max(0.0, W - b.w));
                const double y = rng.uniform(0.0, std::max(0.0, H - b.h));
                session.emit(event("reposition", kind, i, {{"x", x}, {"y", y}}));
            }
            if (rng.bernoulli(schedule::p_collapse(s))) {
                const double dim = rng.bernoulli(0.5) ? 1.0 : 0.0;
                const double value = rng.uniform(1.0, 3.0);
                session.emit(event("collapse", kind, i, {{"dim", dim}, {"value", value}}));
            }
            session.emit(event("clamp", kind, i));
        }
    }
    return session.done();
}

Perturbed perturb_text(const Slide& slide, double s, CounterRng& rng, const PerturbationConfig& cfg) {
    check_severity(s);
    if (s <= kNoOpSeverity) return unchanged(slide, Axis::text, s, rng, cfg);
    Session session(slide, Axis::text, s, rng, cfg);
    for (std::size_t i = 0; i < slide.texts.size(); ++i) {
        if (!rng.bernoulli(cfg.pi_txt)) continue;
        if (rng.bernoulli(schedule::p_drop(s))) {
            session.emit(event("drop", ElementKind::text, i));
            continue;
        }
        auto edits = draw_char_noise(slide.texts[i].content, schedule::p_char(s), rng);
        if (!edits.empty()) {
            PerturbationEvent e = event("char_noise", ElementKind::text, i);
            e.edits = std::move(edits);
            session.emit(std::move(e));
            if (cfg.preserve_numbers) session.emit(event("restore_numbers", ElementKind::text, i));
        }
    }
    if (rng.bernoulli(schedule::p_insert(s))) {
        const int max_n = schedule::max_insert_count(s, cfg.max_inserts);
        const int n = 1 + static_cast<int>(rng.index(static_cast<std::size_t>(max_n)));
        const double W = slide.width, H = slide.height;
        for (int k = 0; k < n; ++k) {
            const double w = rng.uniform(0.15, schedule::insert_w_hi(s)) * W;
            const double h = rng.uniform(0.08, schedule::insert_h_hi(s)) * H;
            const double x = rng.uniform(0.0, W - w);
            const double y = rng.uniform(0.0, H - h);
            const std::string& text = cfg.filler[rng.index(cfg.filler.size())];
            const double pe = schedule::p_insert_emphasis(s);
            const double bold = rng.bernoulli(pe), italic = rng.bernoulli(pe), underline = rng.bernoulli(pe);
            session.emit(event("insert", ElementKind::text, slide.texts.size() + static_cast<std::size_t>(k),
                               {{"x", x},
                                {"y", y},
                                {"w", w},
                                {"h", h},
                                {"size", schedule::insert_font_size(s)},
                                {"bold", bold},
                                {"italic", italic},
                                {"underline", underline}},
                               text));
        }
    }
    return session.done();
}

Perturbed perturb_style(const Slide& slide, double s, CounterRng& rng, const PerturbationConfig& cfg) {
    check_severity(s);
    if (s <= kNoOpSeverity) return unchanged(slide, Axis::style, s, rng, cfg);
    Session session(slide, Axis::style, s, rng, cfg);
    auto hls_draw = [&] {
        const double dh = rng.uniform(-1.0, 1.0) * schedule::hue_jitter(s);
        const double dl = rng.uniform(-1.0, 1.0) * schedule::lightness_jitter(s);
        const double ds = rng.uniform(-1.0, 1.0) * schedule::saturation_jitter(s);
        return std::map<std::string, double>{{"dh", dh}, {"dl", dl}, {"ds", ds}};
    };
    for (std::size_t i = 0; i < slide.texts.size(); ++i) {
        if (!rng.bernoulli(cfg.pi_sty)) continue;
        const auto& font = slide.texts[i].font;
        if (rng.bernoulli(schedule::p_family(s))) {
            const std::string current = canonical_font(font.name);
            std::vector<const std::string*> pool;
            for (const auto& f : cfg.font_pool) {
                if (canonical_font(f) != current) pool.push_back(&f);
            }
            session.emit(event("family", ElementKind::text, i, {}, *pool[rng.index(pool.size())]));
        }
        const double z = rng.normal(0.0, schedule::sigma_size(s));
        session.emit(event("size_jitter", ElementKind::text, i, {{"factor", std::exp(z)}}));
        if (rng.bernoulli(schedule::p_size_extreme(s))) {
            session.emit(event("size_extreme", ElementKind::text, i, {{"factor", rng.uniform(0.12, 3.8)}}));
        }
        for (const char* flag : {"bold", "italic", "underline"}) {
            if (rng.bernoulli(schedule::p_toggle(s))) session.emit(event("toggle", ElementKind::text, i, {}, flag));
        }
        if (rng.bernoulli(schedule::p_inject(s))) {
            session.emit(event("inject_color", ElementKind::text, i, {}, cfg.palette[rng.index(cfg.palette.size())]));
        } else {
            session.emit(event("hls_jitter", ElementKind::text, i, hls_draw()));
        }
        if (rng.bernoulli(schedule::p_low_contrast(s))) {
            session.emit(event("low_contrast", ElementKind::text, i, {{"alpha", schedule::alpha_low_contrast(s)}}));
        }
    }
    if (rng.bernoulli(schedule::p_background(s))) {
        session.emit(event("background_jitter", ElementKind::text, 0, hls_draw()));
    }
    return session.done();
}

Perturbed perturb(const Slide& slide, Axis axis, double s, const PerturbationConfig& cfg) {
    CounterRng rng(derive_seed(cfg.base_seed, slide.slide_id, axis, s));
    switch (axis) {
        case Axis::geometry: return perturb_geometry(slide, s, rng, cfg);
        case Axis::text: return perturb_text(slide, s, rng, cfg);
        case Axis::style: return perturb_style(slide, s, rng, cfg);
    }
    throw std::invalid_argument("unknown axis");
}

Slide replay(const Slide& clean, const PerturbationRecord& record) {
    Slide out = clean;
    ApplyContext ctx{clean, record.allow_clipping, std::vector<bool>(clean.texts.size(), false)};
    for (const auto& e : record.events) apply_event(out, e, ctx);
    finish(out, ctx);
    return out;
}

json to_json(const PerturbationRecord& r) {
    json events = json::array();
    for (const auto& e : r.events) {
        json j{{"op", e.op}, {"kind", std::string(to_string(e.kind))}, {"index", e.index}};
        if (!e.params.empty()) j["params"] = e.params;
        if (!e.value.empty()) j["value"] = e.value;
        if (!e.edits.empty()) {
            json edits = json::array();
            for (const auto& ed : e.edits) {
                json x{{"pos", ed.pos}, {"op", std::string(op_name(ed.op))}};
                if (ed.op == TextEdit::Op::substitute || ed.op == TextEdit::Op::insert) {
                    std::string ch;
                    utf8::append(ch, ed.ch);
                    x["ch"] = ch;
                }
                edits.push_back(std::move(x));
            }
            j["edits"] = std::move(edits);
        }
        events.push_back(std::move(j));
    }
    return json{{"slide_id", r.slide_id},
                {"axis", std::string(to_string(r.axis))},
                {"severity", r.severity},
                {"seed", r.seed},
                {"allow_clipping", r.allow_clipping},
                {"preserve_numbers", r.preserve_numbers},
                {"events", std::move(events)}};
}

PerturbationRecord record_from_json(const json& doc) {
    PerturbationRecord r;
    r.slide_id = doc.at("slide_id").get<std::string>();
    auto axis = parse_axis(doc.at("axis").get<std::string>());
    if (!axis) throw std::invalid_argument("unknown axis in record");
    r.axis = *axis;
    r.severity = doc.at("severity").get<double>();
    r.seed = doc.at("seed").get<std::uint64_t>();
    r.allow_clipping = doc.at("allow_clipping").get<bool>();
    r.preserve_numbers = doc.at("preserve_numbers").get<bool>();
    for (const auto& j : doc.at("events")) {
        PerturbationEvent e;
        e.op = j.at("op").get<std::string>();
        const std::string kind = j.at("kind").get<std::string>();
        bool found = false;
        for (ElementKind k : kAllKinds) {
            if (to_string(k) == kind) {
                e.kind = k;
                found = true;
            }
        }
        if (!found) throw std::invalid_argument("unknown element kind in record");
        e.index = j.at("index").get<std::size_t>();
        if (j.contains("params")) e.params = j["params"].get<std::map<std::string, double>>();
        if (j.contains("value")) e.value = j["value"].get<std::string>();
        if (j.contains("edits")) {
            for (const auto& x : j["edits"]) {
                TextEdit ed;
                ed.pos = x.at("pos").get<std::size_t>();
                ed.op = parse_op(x.at("op").get<std::string>());
                if (x.contains("ch")) {
                    const auto cps = utf8::decode(x["ch"].get<std::string>());
                    if (cps.size() != 1) throw std::invalid_argument("edit character must be one code point");
                    ed.ch = cps[0];
                }
                e.edits.push_back(ed);
            }
        }
        r.events.push_back(std::move(e));
    }
    return r;
}

std::vector<double> default_severity_grid() {
    std::vector<double> g;
    for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
    return g;
}

namespace {

std::string format_severity(double s) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", s);
    return buf;
}

std::string file_stem(std::string_view id) {
    std::string out;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '.' ||
                        c == '-' || c == '_';
        out += ok ? c : '_';
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    f << text;
    if (!f) throw std::runtime_error("cannot write " + path.string());
}

std::string shortest(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string variant_id(std::string_view slide_id, Axis axis, double severity) {
    return std::string(slide_id) + "|" + std::string(to_string(axis)) + "|" + format_severity(severity);
}

std::string PerturbationManifest::to_tsv() const {
    std::string out = "variant_id\tslide_id\taxis\tseverity\tseed\tslide_path\timage_path\trecord_path\tstatus\n";
    for (const auto& r : rows) {
        out += r.variant_id + '\t' + r.slide_id + '\t' + std::string(to_string(r.axis)) + '\t' + shortest(r.severity) +
               '\t' + std::to_string(r.seed) + '\t' + r.slide_path + '\t' + r.image_path + '\t' + r.record_path + '\t' +
               r.status + '\n';
    }
    return out;
}

PerturbationManifest PerturbationManifest::from_tsv(std::string_view text) {
    PerturbationManifest m;
    std::istringstream in{std::string(text)};
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        while (true) {
            const auto tab = line.find('\t', start);
            f.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
            if (tab == std::string::npos) break;
            start = tab + 1;
        }
        if (f.size() != 9) throw std::invalid_argument("manifest row has " + std::to_string(f.size()) + " fields");
        VariantRow r;
        r.variant_id = f[0];
        r.slide_id = f[1];
        auto axis = parse_axis(f[2]);
        if (!axis) throw std::invalid_argument("unknown axis " + f[2]);
        r.axis = *axis;
        r.severity = std::stod(f[3]);
        r.seed = std::stoull(f[4]);
        r.slide_path = f[5];
        r.image_path = f[6];
        r.record_path = f[7];
        r.status = f[8];
        if (r.status != "ok") ++m.failures;
        m.rows.push_back(std::move(r));
    }
    return m;
}

PerturbationManifest synthesize_suite(std::span<const Slide> seeds, std::span<const double> severities,
                                      std::span<const Axis> axes, const PerturbationConfig& cfg,
                                      const SuiteOptions& options) {
    cfg.validate();
    for (double s : severities) check_severity(s);

    struct Job {
        std::size_t seed_index;
        Axis axis;
        double severity;
    };
    std::vector<Job> jobs;
    for (Axis axis : axes) {
        for (double s : severities) {
            std::vector<std::size_t> chosen(seeds.size());
            for (std::size_t i = 0; i < seeds.size(); ++i) chosen[i] = i;
            if (options.cap_per_cell && *options.cap_per_cell < seeds.size()) {
                // Deterministic per-cell subsample: smallest derived seeds win.
                std::stable_sort(chosen.begin(), chosen.end(), [&](std::size_t a, std::size_t b) {
                    return derive_seed(cfg.base_seed, seeds[a].slide_id, axis, s) <
                           derive_seed(cfg.base_seed, seeds[b].slide_id, axis, s);
                });
                chosen.resize(*options.cap_per_cell);
                std::sort(chosen.begin(), chosen.end());
            }
            for (std::size_t i : chosen) jobs.push_back({i, axis, s});
        }
    }

    const bool write = !options.out_dir.empty();
    if (write) {
        std::filesystem::create_directories(options.out_dir / "slides");
        std::filesystem::create_directories(options.out_dir / "records");
        if (options.write_image) std::filesystem::create_directories(options.out_dir / "images");
    }

    PerturbationManifest manifest;
    manifest.rows.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            const Job& job = jobs[j];
            const Slide& seed = seeds[job.seed_index];
            VariantRow& row = manifest.rows[j];
            row.slide_id = seed.slide_id;
            row.axis = job.axis;
            row.severity = job.severity;
            row.variant_id = variant_id(seed.slide_id, job.axis, job.severity);
            row.seed = derive_seed(cfg.base_seed, seed.slide_id, job.axis, job.severity);
            Perturbed p = perturb(seed, job.axis, job.severity, cfg);
            p.slide.slide_id = row.variant_id;
            if (!write) continue;
            const std::string stem = file_stem(row.variant_id);
            row.slide_path = "slides/" + stem + ".json";
            row.record_path = "records/" + stem + ".json";
            try {
                write_file(options.out_dir / row.slide_path, serialize(p.slide));
                write_file(options.out_dir / row.record_path, to_json(p.record).dump(2) + "\n");
                if (options.write_image) {
                    auto img = options.write_image(p.slide, options.out_dir / "images" / stem);
                    if (!img) throw std::runtime_error("image write failed");
                    row.image_path = std::filesystem::relative(*img, options.out_dir).generic_string();
                }
            } catch (const std::exception&) {
                row.status = "io_failure";
            }
        }
    };
    const unsigned n = std::max(1u, options.workers);
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (const auto& r : manifest.rows) manifest.failures += r.status != "ok";
    if (write) write_file(options.out_dir / "manifest.tsv", manifest.to_tsv());
    return manifest;
}

}  // namespace slideeval
