#include "recomb/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace recomb {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument("config: " + what); }

void require_keys(const json& j, const std::string& where,
                  std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : j.items()) {
        (void)value;
        if (std::find_if(allowed.begin(), allowed.end(),
                         [&](const char* k) { return key == k; }) == allowed.end()) {
            fail("unknown key \"" + key + "\" in " + where);
        }
    }
}

const json& expect(const json& j, const char* key, const std::string& where) {
    const auto it = j.find(key);
    if (it == j.end()) fail(where + " is missing \"" + key + "\"");
    return *it;
}

double as_number(const json& j, const std::string& where) {
    if (!j.is_number()) fail(where + " must be a number");
    return j.get<double>();
}

std::uint64_t as_count(const json& j, const std::string& where) {
    if (!j.is_number_unsigned()) fail(where + " must be a nonnegative integer");
    return j.get<std::uint64_t>();
}

void parse_space(const json& j, ExperimentConfig& c) {
    if (!j.is_object()) fail("\"space\" must be an object");
    require_keys(j, "\"space\"", {"alphabet_sizes", "alphabets"});
    const bool has_sizes = j.contains("alphabet_sizes");
    const bool has_labels = j.contains("alphabets");
    if (has_sizes == has_labels) {
        fail("\"space\" needs exactly one of \"alphabet_sizes\" or \"alphabets\"");
    }
    if (has_sizes) {
        for (const auto& v : expect(j, "alphabet_sizes", "\"space\"")) {
            const auto k = as_count(v, "alphabet size");
            if (k == 0 || k > 0xFFFFFFFFULL) fail("alphabet sizes must be in [1, 2^32)");
            c.alphabet_sizes.push_back(static_cast<Letter>(k));
        }
    } else {
        for (const auto& site : expect(j, "alphabets", "\"space\"")) {
            if (!site.is_array() || site.empty()) fail("each alphabet must be a nonempty list");
            std::vector<std::string> labels;
            for (const auto& v : site) {
                if (!v.is_string()) fail("alphabet symbols must be strings");
                const auto label = v.get<std::string>();
                if (label.empty() || label.find(',') != std::string::npos) {
                    fail("alphabet symbol \"" + label + "\" must be nonempty and comma-free");
                }
                if (std::find(labels.begin(), labels.end(), label) != labels.end()) {
                    fail("duplicate alphabet symbol \"" + label + "\"");
                }
                labels.push_back(label);
            }
            c.alphabet_sizes.push_back(static_cast<Letter>(labels.size()));
            c.alphabet_labels.push_back(std::move(labels));
        }
    }
    if (c.alphabet_sizes.empty()) fail("the space needs at least one site");
}

void parse_frames(const json& j, ExperimentConfig& c) {
    if (!j.is_array()) fail("\"frames\" must be a list of site lists");
    const int n = static_cast<int>(c.alphabet_sizes.size());
    for (const auto& frame : j) {
        if (!frame.is_array() || frame.empty()) fail("each frame must be a nonempty site list");
        SiteSet sites;
        for (const auto& v : frame) {
            const auto site = as_count(v, "site index");
            if (site < 1 || site > static_cast<std::uint64_t>(n)) {
                fail("site index " + std::to_string(site) + " out of range 1.." +
                     std::to_string(n));
            }
            sites.push_back(static_cast<int>(site) - 1);
        }
        std::sort(sites.begin(), sites.end());
        if (std::adjacent_find(sites.begin(), sites.end()) != sites.end()) {
            fail("a frame lists the same site twice");
        }
        c.frames.push_back(std::move(sites));
    }
}

void parse_legend(const json& j, ExperimentConfig& c) {
    if (j.is_string()) {
        if (j.get<std::string>() != "uniform") {
            fail("\"legend\" must be \"uniform\" or a list of per-frame matrices");
        }
        c.legend.uniform = true;
        return;
    }
    if (!j.is_array()) fail("\"legend\" must be \"uniform\" or a list of per-frame matrices");
    c.legend.uniform = false;
    c.legend.matrices.assign(c.frames.size(), {});
    std::vector<char> seen(c.frames.size(), 0);
    for (const auto& entry : j) {
        if (!entry.is_object()) fail("each legend entry must be an object");
        require_keys(entry, "a legend entry", {"frame", "values"});
        const auto f = as_count(expect(entry, "frame", "a legend entry"), "legend frame index");
        if (f < 1 || f > c.frames.size()) {
            fail("legend frame index " + std::to_string(f) + " out of range 1.." +
                 std::to_string(c.frames.size()));
        }
        if (seen[f - 1]) fail("legend lists frame " + std::to_string(f) + " twice");
        seen[f - 1] = 1;
        const json& rows = expect(entry, "values", "a legend entry");
        if (!rows.is_array() || rows.empty()) fail("legend values must be a matrix (row list)");
        std::vector<double> flat;
        const std::size_t dim = rows.size();
        for (const auto& row : rows) {
            if (!row.is_array() || row.size() != dim) {
                fail("legend matrix for frame " + std::to_string(f) + " is not square");
            }
            for (const auto& v : row) flat.push_back(as_number(v, "legend matrix entry"));
        }
        c.legend.matrices[f - 1] = std::move(flat);
    }
    for (std::size_t f = 0; f < seen.size(); ++f) {
        if (!seen[f]) fail("legend is missing a matrix for frame " + std::to_string(f + 1));
    }
}

Letter parse_letter(const ExperimentConfig& c, std::size_t site, const json& v) {
    if (v.is_number_unsigned()) {
        const auto code = v.get<std::uint64_t>();
        if (code >= c.alphabet_sizes[site]) {
            fail("letter " + std::to_string(code) + " out of range at site " +
                 std::to_string(site + 1));
        }
        return static_cast<Letter>(code);
    }
    if (v.is_string() && site < c.alphabet_labels.size()) {
        const auto& labels = c.alphabet_labels[site];
        const auto it = std::find(labels.begin(), labels.end(), v.get<std::string>());
        if (it == labels.end()) {
            fail("symbol \"" + v.get<std::string>() + "\" is not in the alphabet of site " +
                 std::to_string(site + 1));
        }
        return static_cast<Letter>(it - labels.begin());
    }
    fail("letters must be codes" +
         std::string(c.alphabet_labels.empty() ? "" : " or configured symbols"));
}

Word parse_word_json(const ExperimentConfig& c, const json& j) {
    if (!j.is_array() || j.size() != c.alphabet_sizes.size()) {
        fail("a word must list one letter per site");
    }
    Word w;
    w.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) w.push_back(parse_letter(c, i, j[i]));
    return w;
}

void parse_initial(const json& j, ExperimentConfig& c) {
    if (!j.is_object()) fail("\"initial_measure\" must be an object");
    const std::string type = expect(j, "type", "\"initial_measure\"").get<std::string>();
    if (type == "explicit") {
        require_keys(j, "\"initial_measure\"", {"type", "weights"});
        c.initial.kind = InitialMeasureSpec::Kind::explicit_weights;
        for (const auto& v : expect(j, "weights", "\"initial_measure\"")) {
            c.initial.weights.push_back(as_number(v, "initial weight"));
        }
    } else if (type == "product") {
        require_keys(j, "\"initial_measure\"", {"type", "marginals"});
        c.initial.kind = InitialMeasureSpec::Kind::product;
        for (const auto& m : expect(j, "marginals", "\"initial_measure\"")) {
            std::vector<double> site;
            for (const auto& v : m) site.push_back(as_number(v, "marginal weight"));
            c.initial.marginals.push_back(std::move(site));
        }
    } else if (type == "uniform_on_words") {
        require_keys(j, "\"initial_measure\"", {"type", "words"});
        c.initial.kind = InitialMeasureSpec::Kind::uniform_on_words;
        const json& words = expect(j, "words", "\"initial_measure\"");
        if (!words.is_array() || words.empty()) fail("\"words\" must be a nonempty list");
        for (const auto& w : words) c.initial.words.push_back(parse_word_json(c, w));
    } else {
        fail("unknown initial measure type \"" + type + "\"");
    }
}

void parse_integrator(const json& j, ExperimentConfig& c) {
    if (!j.is_object()) fail("\"integrator\" must be an object");
    require_keys(j, "\"integrator\"",
                 {"step", "safety", "rate_budget", "renorm_tol", "drift_limit", "negative_tol",
                  "support_threshold"});
    IntegratorConfig& ic = c.integrator;
    if (j.contains("step")) ic.step = as_number(j["step"], "integrator step");
    if (j.contains("safety")) ic.safety = as_number(j["safety"], "integrator safety");
    if (j.contains("rate_budget")) ic.rate_budget = as_number(j["rate_budget"], "rate budget");
    if (j.contains("renorm_tol")) ic.renorm_tol = as_number(j["renorm_tol"], "renorm tolerance");
    if (j.contains("drift_limit")) ic.drift_limit = as_number(j["drift_limit"], "drift limit");
    if (j.contains("negative_tol")) {
        ic.negative_tol = as_number(j["negative_tol"], "negativity tolerance");
    }
    if (j.contains("support_threshold")) {
        ic.support_threshold = as_number(j["support_threshold"], "support threshold");
    }
}

void parse_particle(const json& j, ExperimentConfig& c) {
    if (!j.is_object()) fail("\"particle\" must be an object");
    require_keys(j, "\"particle\"", {"n", "seed", "snapshot_times"});
    if (j.contains("n")) c.particle.n = as_count(j["n"], "particle count");
    if (j.contains("seed")) c.particle.seed = as_count(j["seed"], "seed");
    if (j.contains("snapshot_times")) {
        for (const auto& v : j["snapshot_times"]) {
            c.particle.snapshot_times.push_back(as_number(v, "snapshot time"));
        }
    }
}

} // namespace

ExperimentConfig parse_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(std::string("not valid JSON: ") + e.what());
    }
    ExperimentConfig c;
    try {
        if (!j.is_object()) fail("top level must be an object");
        require_keys(j, "the top level",
                     {"schema_version", "space", "frames", "legend", "initial_measure",
                      "integrator", "particle", "output", "state_cap"});

        const auto version =
            as_count(expect(j, "schema_version", "the config"), "schema_version");
        if (version != 1) fail("unsupported schema_version " + std::to_string(version));
        c.schema_version = 1;

        parse_space(expect(j, "space", "the config"), c);
        parse_frames(expect(j, "frames", "the config"), c);
        parse_legend(expect(j, "legend", "the config"), c);
        parse_initial(expect(j, "initial_measure", "the config"), c);
        if (j.contains("integrator")) parse_integrator(j["integrator"], c);
        if (j.contains("particle")) parse_particle(j["particle"], c);
        if (j.contains("output")) {
            const json& out = j["output"];
            if (!out.is_object()) fail("\"output\" must be an object");
            require_keys(out, "\"output\"", {"dir"});
            if (out.contains("dir")) c.output_dir = out["dir"].get<std::string>();
        }
        if (j.contains("state_cap")) c.state_cap = as_count(j["state_cap"], "state cap");
    } catch (const json::exception& e) {
        fail(std::string("malformed field: ") + e.what());
    }

    // Surface invariant violations now, with field names, rather than at
    // first use: build every object the config describes once.
    SpacePtr space = build_space(c);
    FrameSystem fs = build_frame_system(c, space);
    try {
        build_legend(c, fs);
    } catch (const std::invalid_argument& e) {
        fail(std::string("legend: ") + e.what());
    }
    build_initial_measure(c, space, nullptr);
    return c;
}

std::string config_to_json(const ExperimentConfig& c) {
    json j;
    j["schema_version"] = c.schema_version;
    if (c.alphabet_labels.empty()) {
        j["space"]["alphabet_sizes"] = c.alphabet_sizes;
    } else {
        j["space"]["alphabets"] = c.alphabet_labels;
    }
    j["frames"] = json::array();
    for (const SiteSet& frame : c.frames) {
        json sites = json::array();
        for (int site : frame) sites.push_back(site + 1);
        j["frames"].push_back(std::move(sites));
    }
    if (c.legend.uniform) {
        j["legend"] = "uniform";
    } else {
        j["legend"] = json::array();
        for (std::size_t f = 0; f < c.legend.matrices.size(); ++f) {
            const auto& flat = c.legend.matrices[f];
            const auto dim = static_cast<std::size_t>(std::lround(std::sqrt(
                static_cast<double>(flat.size()))));
            json rows = json::array();
            for (std::size_t a = 0; a < dim; ++a) {
                rows.push_back(std::vector<double>(flat.begin() + static_cast<long>(a * dim),
                                                   flat.begin() + static_cast<long>((a + 1) * dim)));
            }
            j["legend"].push_back({{"frame", f + 1}, {"values", std::move(rows)}});
        }
    }
    switch (c.initial.kind) {
        case InitialMeasureSpec::Kind::explicit_weights:
            j["initial_measure"] = {{"type", "explicit"}, {"weights", c.initial.weights}};
            break;
        case InitialMeasureSpec::Kind::product:
            j["initial_measure"] = {{"type", "product"}, {"marginals", c.initial.marginals}};
            break;
        case InitialMeasureSpec::Kind::uniform_on_words: {
            json words = json::array();
            for (const Word& w : c.initial.words) words.push_back(w);
            j["initial_measure"] = {{"type", "uniform_on_words"}, {"words", std::move(words)}};
            break;
        }
    }
    j["integrator"] = {{"step", c.integrator.step},
                       {"safety", c.integrator.safety},
                       {"rate_budget", c.integrator.rate_budget},
                       {"renorm_tol", c.integrator.renorm_tol},
                       {"drift_limit", c.integrator.drift_limit},
                       {"negative_tol", c.integrator.negative_tol},
                       {"support_threshold", c.integrator.support_threshold}};
    j["particle"] = {{"n", c.particle.n},
                     {"seed", c.particle.seed},
                     {"snapshot_times", c.particle.snapshot_times}};
    j["output"] = {{"dir", c.output_dir}};
    j["state_cap"] = c.state_cap;
    return j.dump(2) + "\n";
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

void save_config(const ExperimentConfig& c, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) fail("cannot write " + path.string());
    out << config_to_json(c);
}

SpacePtr build_space(const ExperimentConfig& c) {
    return make_space(c.alphabet_sizes, c.state_cap);
}

FrameSystem build_frame_system(const ExperimentConfig& c, SpacePtr space) {
    return FrameSystem(std::move(space), c.frames);
}

Legend build_legend(const ExperimentConfig& c, const FrameSystem& fs) {
    if (c.legend.uniform) return Legend::uniform(fs);
    std::vector<SimilarityMatrix> mats;
    mats.reserve(c.legend.matrices.size());
    for (std::size_t f = 0; f < c.legend.matrices.size(); ++f) {
        const auto& flat = c.legend.matrices[f];
        const auto dim = static_cast<std::size_t>(std::lround(std::sqrt(
            static_cast<double>(flat.size()))));
        try {
            mats.emplace_back(dim, flat);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("frame " + std::to_string(f + 1) + ": " + e.what());
        }
    }
    return Legend(fs, std::move(mats));
}

namespace {

/// Brings near-simplex weights onto the simplex: tiny negatives are clamped,
/// tiny total-mass error rescaled; beyond `tol` it is an error, not a fix.
void snap_to_simplex(std::vector<double>& w, double tol, const std::string& what,
                     std::ostream* warnings) {
    double total = 0.0;
    double worst_negative = 0.0;
    for (const double v : w) {
        if (!std::isfinite(v)) fail(what + " has a non-finite weight");
        worst_negative = std::min(worst_negative, v);
        total += v;
    }
    if (worst_negative < -tol) {
        fail(what + " has a negative weight " + std::to_string(worst_negative));
    }
    if (std::fabs(total - 1.0) > tol) {
        fail(what + " sums to " + std::to_string(total) + ", not 1");
    }
    bool touched = false;
    if (worst_negative < 0.0) {
        for (double& v : w) {
            if (v < 0.0) v = 0.0;
        }
        touched = true;
        total = 0.0;
        for (const double v : w) total += v;
    }
    if (total != 1.0) {
        const double inv = 1.0 / total;
        for (double& v : w) v *= inv;
        touched = touched || std::fabs(total - 1.0) > 1e-15;
    }
    if (touched && warnings) {
        *warnings << "note: " << what << " renormalized (total was "
                  << std::to_string(total) << ")\n";
    }
}

} // namespace

DenseMeasure build_initial_measure(const ExperimentConfig& c, SpacePtr space,
                                   std::ostream* warnings) {
    constexpr double kSimplexTol = 1e-9;
    switch (c.initial.kind) {
        case InitialMeasureSpec::Kind::explicit_weights: {
            std::vector<double> w = c.initial.weights;
            if (w.size() != space->state_count()) {
                fail("initial weights: expected " + std::to_string(space->state_count()) +
                     " entries, got " + std::to_string(w.size()));
            }
            snap_to_simplex(w, kSimplexTol, "initial measure", warnings);
            return DenseMeasure(std::move(space), std::move(w), 1e-9);
        }
        case InitialMeasureSpec::Kind::product: {
            if (c.initial.marginals.size() != static_cast<std::size_t>(space->site_count())) {
                fail("initial marginals: one simplex per site required");
            }
            std::vector<std::vector<double>> marginals = c.initial.marginals;
            for (std::size_t i = 0; i < marginals.size(); ++i) {
                if (marginals[i].size() != space->alphabet_size(static_cast<int>(i))) {
                    fail("initial marginal for site " + std::to_string(i + 1) +
                         " has the wrong length");
                }
                snap_to_simplex(marginals[i], kSimplexTol,
                                "initial marginal of site " + std::to_string(i + 1), warnings);
            }
            std::vector<double> w(space->state_count());
            for (StateIndex s = 0; s < space->state_count(); ++s) {
                const Word word = space->decode(s);
                double p = 1.0;
                for (std::size_t i = 0; i < word.size(); ++i) p *= marginals[i][word[i]];
                w[s] = p;
            }
            return DenseMeasure::normalized(std::move(space), std::move(w));
        }
        case InitialMeasureSpec::Kind::uniform_on_words:
            return DenseMeasure::uniform_on(std::move(space), c.initial.words);
    }
    fail("unreachable initial measure kind");
}

std::string format_word(const ExperimentConfig& c, const Word& w) {
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i) out += ',';
        if (i < c.alphabet_labels.size()) {
            out += c.alphabet_labels[i][w[i]];
        } else {
            out += std::to_string(w[i]);
        }
    }
    return out;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

Word parse_word(const ExperimentConfig& c, const std::string& text) {
    std::vector<std::string> parts;
    std::string current;
    for (const char ch : text) {
        if (ch == ',') {
            parts.push_back(trim(current));
            current.clear();
        } else {
            current += ch;
        }
    }
    parts.push_back(trim(current));
    if (parts.size() != c.alphabet_sizes.size()) {
        fail("word \"" + text + "\": expected " + std::to_string(c.alphabet_sizes.size()) +
             " letters, got " + std::to_string(parts.size()));
    }
    Word w;
    w.reserve(parts.size());
    for (std::size_t i = 0; i < parts.size(); ++i) {
        const std::string& p = parts[i];
        if (p.empty()) fail("word \"" + text + "\" has an empty letter");
        if (i < c.alphabet_labels.size()) {
            const auto& labels = c.alphabet_labels[i];
            const auto it = std::find(labels.begin(), labels.end(), p);
            if (it != labels.end()) {
                w.push_back(static_cast<Letter>(it - labels.begin()));
                continue;
            }
        }
        if (p.size() > 9 || p.find_first_not_of("0123456789") != std::string::npos) {
            fail("letter \"" + p + "\" is neither a code nor a symbol of site " +
                 std::to_string(i + 1));
        }
        const auto code = std::stoull(p);
        if (code >= c.alphabet_sizes[i]) {
            fail("letter " + p + " out of range at site " + std::to_string(i + 1));
        }
        w.push_back(static_cast<Letter>(code));
    }
    return w;
}

std::vector<Word> load_word_list(const ExperimentConfig& c, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open " + path.string());
    std::vector<Word> words;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        words.push_back(parse_word(c, line));
    }
    return words;
}

} // namespace recomb
