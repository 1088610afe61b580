#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "recomb/dynamics.hpp"
#include "recomb/frames.hpp"
#include "recomb/measure.hpp"
#include "recomb/product_space.hpp"

namespace recomb {

/// How the starting distribution is specified in a config file.
struct InitialMeasureSpec {
    enum class Kind { explicit_weights, product, uniform_on_words };

    Kind kind = Kind::explicit_weights;
    std::vector<double> weights;                // explicit_weights: state-index order
    std::vector<std::vector<double>> marginals; // product: one simplex per site
    std::vector<Word> words;                    // uniform_on_words

    bool operator==(const InitialMeasureSpec&) const = default;
};

/// Legend as configured: the "uniform" shorthand (rate 1 everywhere) or one
/// explicit row-major matrix per frame, index-aligned with the frame list.
struct LegendSpec {
    bool uniform = true;
    std::vector<std::vector<double>> matrices;

    bool operator==(const LegendSpec&) const = default;
};

struct ParticleSpec {
    std::uint64_t n = 0; // 0 = not configured
    std::uint64_t seed = 0;
    std::vector<double> snapshot_times;

    bool operator==(const ParticleSpec&) const = default;
};

/// A full experiment description, mirroring the JSON schema (version 1).
/// Site and frame indices are 1-based in files, 0-based here.
struct ExperimentConfig {
    int schema_version = 1;
    std::vector<Letter> alphabet_sizes;
    std::vector<std::vector<std::string>> alphabet_labels; // empty, or one list per site
    std::vector<SiteSet> frames;
    LegendSpec legend;
    InitialMeasureSpec initial;
    IntegratorConfig integrator;
    ParticleSpec particle;
    std::string output_dir = "out";
    StateIndex state_cap = ProductSpace::kDefaultStateCap;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parses and validates config JSON. Structural and semantic problems throw
/// std::invalid_argument naming the offending field; the similarity-matrix
/// and space invariants are enforced here, not deferred to first use.
ExperimentConfig parse_config(const std::string& json_text);

/// Canonical JSON rendering; parse_config(config_to_json(c)) == c.
std::string config_to_json(const ExperimentConfig& c);

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& c, const std::filesystem::path& path);

// Builders for the typed objects a run needs.
SpacePtr build_space(const ExperimentConfig& c);
FrameSystem build_frame_system(const ExperimentConfig& c, SpacePtr space);
Legend build_legend(const ExperimentConfig& c, const FrameSystem& fs);

/// Realizes the configured starting distribution. Weights within 1e-9 of the
/// simplex are renormalized with a note to `warnings` (when given); larger
/// deviations are errors.
DenseMeasure build_initial_measure(const ExperimentConfig& c, SpacePtr space,
                                   std::ostream* warnings = nullptr);

/// Word <-> text, using the configured labels when present, letter codes
/// otherwise; letters are comma-separated, e.g. "a,b" or "0,1".
std::string format_word(const ExperimentConfig& c, const Word& w);
Word parse_word(const ExperimentConfig& c, const std::string& text);

/// Word-per-line file (blank lines and #-comments skipped).
std::vector<Word> load_word_list(const ExperimentConfig& c, const std::filesystem::path& path);

} // namespace recomb
