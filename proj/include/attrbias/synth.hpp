#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "attrbias/ingest.hpp"

namespace attrbias::synth {

struct PerSubjectProb {
  double p = 0.5;
  friend bool operator==(const PerSubjectProb&, const PerSubjectProb&) = default;
};

// Copies (rho > 0) or negates (rho < 0) the other attribute with probability
// |rho|, else draws independently with the matching marginal; the expected
// Pearson coefficient with the partner is then exactly rho.
struct CorrelatedWith {
  std::string other;
  double rho = 0.0;
  friend bool operator==(const CorrelatedWith&, const CorrelatedWith&) = default;
};

using Assignment = std::variant<PerSubjectProb, CorrelatedWith>;

struct NoEffect {
  friend bool operator==(const NoEffect&, const NoEffect&) = default;
};
// Adds an independent isotropic noise draw of this sigma to carriers.
struct ExtraNoise {
  double sigma = 0.0;
  friend bool operator==(const ExtraNoise&, const ExtraNoise&) = default;
};
// Keeps only this fraction (at least two per subject) of each carrier's
// samples labelled Positive; the rest become Undefined.
struct CountSkew {
  double fraction = 1.0;
  friend bool operator==(const CountSkew&, const CountSkew&) = default;
};

using Effect = std::variant<NoEffect, ExtraNoise, CountSkew>;

enum class Granularity { PerSubject, PerSample };

struct SynthAttribute {
  std::string name;
  Assignment assignment = PerSubjectProb{};
  Effect effect = NoEffect{};
  Granularity granularity = Granularity::PerSubject;
  friend bool operator==(const SynthAttribute&, const SynthAttribute&) = default;
};

struct SynthConfig {
  std::size_t n_subjects = 100;
  std::size_t samples_per_subject = 10;
  std::uint32_t dim = 64;
  double base_noise = 0.1;  // per-coordinate standard deviation
  std::vector<SynthAttribute> attributes;
  std::uint64_t seed = 0;
};

struct PlantedAttribute {
  std::string name;
  Effect effect;
  std::optional<std::string> correlated_with;
  double rho = 0.0;
  double marginal = 0.0;  // expected fraction of carrier units
  std::size_t carrier_subjects = 0;  // subjects with at least one carrier sample
  std::size_t positive_samples = 0;  // after count skew
};

struct GroundTruth {
  std::vector<PlantedAttribute> attributes;
};

struct SynthOutput {
  EmbeddingFile embeddings;
  AnnotationTable annotations;
  GroundTruth truth;
};

void validate(const SynthConfig& cfg);

// Each subject gets a latent direction uniform on the sphere; a sample is the
// latent plus Gaussian noise projected onto its tangent plane, renormalized.
SynthOutput generate(const SynthConfig& cfg);

// Writes embeddings.bprb, annotations.csv and ground_truth.json into dir.
void write_fixture(const SynthOutput& out, const std::filesystem::path& dir);

// "name[:p=P][:corr=OTHER,RHO][:extra=S][:skew=F][:per_sample]"
SynthAttribute parse_attribute(const std::string& spec);

// 47 attribute names in the MAAD-Face layout with a few planted correlations
// and effects.
std::vector<SynthAttribute> maad_like_attributes();
const std::vector<std::string>& maad_attribute_names();

// Named configurations: "planted", "null", "imbalance", "maad".
SynthConfig preset(const std::string& name, std::uint64_t seed);
const std::vector<std::string>& preset_names();

}  // namespace attrbias::synth
