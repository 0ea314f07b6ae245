#include "attrbias/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>

#include "json.hpp"

#include "attrbias/error.hpp"
#include "attrbias/rng.hpp"

namespace attrbias::synth {

namespace {

constexpr std::uint64_t kLatentStream = 0x4C41544Eull;  // "LATN"
constexpr std::uint64_t kNoiseStream = 0x4E4F4953ull;   // "NOIS"
constexpr std::uint64_t kLabelStream = 0x4C41424Cull;   // "LABL"
constexpr std::uint64_t kSkewStream = 0x534B4557ull;    // "SKEW"

[[noreturn]] void invalid(const std::string& message) {
  throw Error(ErrorCode::InvalidConfig, message);
}

std::string subject_name(std::size_t s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "id%06zu", s);
  return buf;
}

std::string sample_name(std::size_t s, std::size_t k) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "s%06zu_%04zu", s, k);
  return buf;
}

std::string effect_name(const Effect& e) {
  if (std::holds_alternative<ExtraNoise>(e)) return "extra_noise";
  if (std::holds_alternative<CountSkew>(e)) return "count_skew";
  return "none";
}

double parse_double(const std::string& text, const std::string& spec) {
  try {
    std::size_t used = 0;
    double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    invalid("bad number '" + text + "' in attribute spec '" + spec + "'");
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

void validate(const SynthConfig& cfg) {
  if (cfg.n_subjects == 0) invalid("n_subjects must be positive");
  if (cfg.samples_per_subject == 0) invalid("samples_per_subject must be positive");
  if (cfg.dim == 0) invalid("dim must be positive");
  if (!(cfg.base_noise >= 0.0)) invalid("base_noise must be >= 0");
  std::set<std::string> seen;
  for (const auto& a : cfg.attributes) {
    if (a.name.empty()) invalid("attribute name must be nonempty");
    if (const auto* p = std::get_if<PerSubjectProb>(&a.assignment)) {
      if (!(p->p >= 0.0 && p->p <= 1.0)) invalid(a.name + ": probability outside [0,1]");
    } else {
      const auto& c = std::get<CorrelatedWith>(a.assignment);
      if (!(c.rho >= -1.0 && c.rho <= 1.0)) invalid(a.name + ": rho outside [-1,1]");
      if (!seen.count(c.other)) invalid(a.name + ": correlated_with must name an earlier attribute");
    }
    if (const auto* e = std::get_if<ExtraNoise>(&a.effect); e && !(e->sigma >= 0.0)) {
      invalid(a.name + ": extra noise must be >= 0");
    }
    if (const auto* e = std::get_if<CountSkew>(&a.effect); e && !(e->fraction >= 0.0 && e->fraction <= 1.0)) {
      invalid(a.name + ": count skew fraction outside [0,1]");
    }
    if (!seen.insert(a.name).second) invalid("duplicate attribute '" + a.name + "'");
  }
}

SynthOutput generate(const SynthConfig& cfg) {
  validate(cfg);
  const std::size_t n_subj = cfg.n_subjects;
  const std::size_t per = cfg.samples_per_subject;
  const std::size_t n_samples = n_subj * per;
  const std::size_t n_attr = cfg.attributes.size();
  const std::size_t dim = cfg.dim;

  // carrier[a][sample]: raw assignment before count skew.
  std::vector<std::vector<char>> carrier(n_attr, std::vector<char>(n_samples, 0));
  std::vector<double> marginal(n_attr, 0.0);
  std::map<std::string, std::size_t> index;
  for (std::size_t a = 0; a < n_attr; ++a) {
    const auto& attr = cfg.attributes[a];
    index[attr.name] = a;
    const bool per_sample = attr.granularity == Granularity::PerSample;
    const std::size_t units = per_sample ? n_samples : n_subj;
    const std::uint64_t name_hash = fnv1a(attr.name);
    std::optional<std::size_t> partner;
    double rho = 0.0;
    if (const auto* p = std::get_if<PerSubjectProb>(&attr.assignment)) {
      marginal[a] = p->p;
    } else {
      const auto& c = std::get<CorrelatedWith>(attr.assignment);
      partner = index.at(c.other);
      rho = c.rho;
      marginal[a] = rho >= 0.0 ? marginal[*partner] : 1.0 - marginal[*partner];
    }
    for (std::size_t u = 0; u < units; ++u) {
      CounterRng rng(derive_key(cfg.seed, {kLabelStream, name_hash, u}));
      const std::size_t first = per_sample ? u : u * per;
      char value = 0;
      if (partner) {
        const char other = carrier[*partner][first];
        if (rng.bernoulli(std::abs(rho))) {
          value = rho >= 0.0 ? other : static_cast<char>(!other);
        } else {
          value = rng.bernoulli(marginal[a]) ? 1 : 0;
        }
      } else {
        value = rng.bernoulli(marginal[a]) ? 1 : 0;
      }
      if (per_sample) {
        carrier[a][u] = value;
      } else {
        std::fill_n(carrier[a].begin() + static_cast<std::ptrdiff_t>(first), per, value);
      }
    }
  }

  // Final labels, with count skew turning dropped carrier samples Undefined.
  std::vector<std::vector<Label>> labels(n_attr, std::vector<Label>(n_samples, Label::Negative));
  for (std::size_t a = 0; a < n_attr; ++a) {
    const auto& attr = cfg.attributes[a];
    for (std::size_t i = 0; i < n_samples; ++i) {
      labels[a][i] = carrier[a][i] ? Label::Positive : Label::Negative;
    }
    const auto* skew = std::get_if<CountSkew>(&attr.effect);
    if (!skew) continue;
    const std::uint64_t name_hash = fnv1a(attr.name);
    if (attr.granularity == Granularity::PerSample) {
      for (std::size_t i = 0; i < n_samples; ++i) {
        if (!carrier[a][i]) continue;
        CounterRng rng(derive_key(cfg.seed, {kSkewStream, name_hash, i}));
        if (!rng.bernoulli(skew->fraction)) labels[a][i] = Label::Undefined;
      }
      continue;
    }
    const auto keep = std::max<std::size_t>(
        std::min<std::size_t>(2, per), static_cast<std::size_t>(std::llround(skew->fraction * static_cast<double>(per))));
    for (std::size_t s = 0; s < n_subj; ++s) {
      if (!carrier[a][s * per]) continue;
      CounterRng rng(derive_key(cfg.seed, {kSkewStream, name_hash, s}));
      std::vector<char> kept(per, 0);
      for (auto k : sample_without_replacement(rng, per, std::min(keep, per))) kept[k] = 1;
      for (std::size_t k = 0; k < per; ++k) {
        if (!kept[k]) labels[a][s * per + k] = Label::Undefined;
      }
    }
  }

  // Embeddings, one independent stream per subject and per sample.
  std::vector<float> values(n_samples * dim);
  const auto n_subj_signed = static_cast<std::int64_t>(n_subj);
#pragma omp parallel for schedule(static)
  for (std::int64_t ss = 0; ss < n_subj_signed; ++ss) {
    const auto s = static_cast<std::size_t>(ss);
    std::vector<double> latent(dim);
    {
      CounterRng rng(derive_key(cfg.seed, {kLatentStream, s}));
      double sq = 0.0;
      do {
        sq = 0.0;
        for (auto& x : latent) {
          x = rng.normal();
          sq += x * x;
        }
      } while (sq == 0.0);
      const double inv = 1.0 / std::sqrt(sq);
      for (auto& x : latent) x *= inv;
    }
    std::vector<double> noise(dim);
    for (std::size_t k = 0; k < per; ++k) {
      const std::size_t i = s * per + k;
      CounterRng rng(derive_key(cfg.seed, {kNoiseStream, s, k}));
      for (auto& x : noise) x = cfg.base_noise * rng.normal();
      for (std::size_t a = 0; a < n_attr; ++a) {
        const auto* extra = std::get_if<ExtraNoise>(&cfg.attributes[a].effect);
        if (!extra || !carrier[a][i]) continue;
        for (auto& x : noise) x += extra->sigma * rng.normal();
      }
      double along = 0.0;
      for (std::size_t d = 0; d < dim; ++d) along += noise[d] * latent[d];
      double sq = 0.0;
      for (std::size_t d = 0; d < dim; ++d) {
        noise[d] = latent[d] + (noise[d] - along * latent[d]);
        sq += noise[d] * noise[d];
      }
      const double inv = 1.0 / std::sqrt(sq);
      for (std::size_t d = 0; d < dim; ++d) values[i * dim + d] = static_cast<float>(noise[d] * inv);
    }
  }

  SynthOutput out;
  out.embeddings.dim = cfg.dim;
  out.embeddings.records.reserve(n_samples);
  for (const auto& a : cfg.attributes) out.annotations.attribute_names.push_back(a.name);
  for (std::size_t s = 0; s < n_subj; ++s) {
    for (std::size_t k = 0; k < per; ++k) {
      const std::size_t i = s * per + k;
      EmbeddingRecord rec{sample_name(s, k), subject_name(s),
                          std::vector<float>(values.begin() + static_cast<std::ptrdiff_t>(i * dim),
                                             values.begin() + static_cast<std::ptrdiff_t>((i + 1) * dim))};
      AnnotationRow row{rec.subject_id, {}};
      row.labels.reserve(n_attr);
      for (std::size_t a = 0; a < n_attr; ++a) row.labels.push_back(labels[a][i]);
      out.annotations.rows.emplace(rec.sample_id, std::move(row));
      out.embeddings.records.push_back(std::move(rec));
    }
  }
  for (std::size_t a = 0; a < n_attr; ++a) {
    const auto& attr = cfg.attributes[a];
    PlantedAttribute p;
    p.name = attr.name;
    p.effect = attr.effect;
    p.marginal = marginal[a];
    if (const auto* c = std::get_if<CorrelatedWith>(&attr.assignment)) {
      p.correlated_with = c->other;
      p.rho = c->rho;
    }
    for (std::size_t s = 0; s < n_subj; ++s) {
      bool any = false;
      for (std::size_t k = 0; k < per; ++k) any = any || carrier[a][s * per + k];
      p.carrier_subjects += any ? 1 : 0;
    }
    p.positive_samples = static_cast<std::size_t>(std::count(labels[a].begin(), labels[a].end(), Label::Positive));
    out.truth.attributes.push_back(std::move(p));
  }
  return out;
}

void write_fixture(const SynthOutput& out, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
  write_embeddings(out.embeddings, dir / "embeddings.bprb");
  write_annotations(out.annotations, dir / "annotations.csv");

  nlohmann::json truth = nlohmann::json::array();
  for (const auto& p : out.truth.attributes) {
    nlohmann::json j{{"name", p.name},
                     {"effect", effect_name(p.effect)},
                     {"marginal", p.marginal},
                     {"carrier_subjects", p.carrier_subjects},
                     {"positive_samples", p.positive_samples}};
    if (const auto* e = std::get_if<ExtraNoise>(&p.effect)) j["extra_noise"] = e->sigma;
    if (const auto* e = std::get_if<CountSkew>(&p.effect)) j["count_skew"] = e->fraction;
    if (p.correlated_with) {
      j["correlated_with"] = *p.correlated_with;
      j["rho"] = p.rho;
    }
    truth.push_back(std::move(j));
  }
  std::ofstream os(dir / "ground_truth.json", std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoFailure, "cannot write ground_truth.json in " + dir.string());
  os << nlohmann::json{{"attributes", truth}}.dump(2) << '\n';
}

SynthAttribute parse_attribute(const std::string& spec) {
  const auto parts = split(spec, ':');
  SynthAttribute a;
  a.name = parts[0];
  if (a.name.empty()) invalid("attribute spec '" + spec + "' has no name");
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const auto& part = parts[i];
    const auto eq = part.find('=');
    const std::string key = part.substr(0, eq);
    const std::string value = eq == std::string::npos ? "" : part.substr(eq + 1);
    if (key == "p") {
      a.assignment = PerSubjectProb{parse_double(value, spec)};
    } else if (key == "corr") {
      const auto comma = value.find(',');
      if (comma == std::string::npos) invalid("corr needs OTHER,RHO in '" + spec + "'");
      a.assignment = CorrelatedWith{value.substr(0, comma), parse_double(value.substr(comma + 1), spec)};
    } else if (key == "extra") {
      a.effect = ExtraNoise{parse_double(value, spec)};
    } else if (key == "skew") {
      a.effect = CountSkew{parse_double(value, spec)};
    } else if (key == "per_sample") {
      a.granularity = Granularity::PerSample;
    } else {
      invalid("unknown key '" + key + "' in attribute spec '" + spec + "'");
    }
  }
  return a;
}

const std::vector<std::string>& maad_attribute_names() {
  static const std::vector<std::string> names = {
      "Male", "Young", "Middle_Aged", "Senior", "Asian", "White", "Black", "Rosy_Cheeks",
      "Shiny_Skin", "Bald", "Wavy_Hair", "Receding_Hairline", "Bangs", "Sideburns",
      "Black_Hair", "Blond_Hair", "Brown_Hair", "Gray_Hair", "No_Beard", "Mustache",
      "5_o_Clock_Shadow", "Goatee", "Oval_Face", "Square_Face", "Round_Face", "Double_Chin",
      "High_Cheekbones", "Chubby", "Obstructed_Forehead", "Fully_Visible_Forehead",
      "Brown_Eyes", "Bags_Under_Eyes", "Bushy_Eyebrows", "Arched_Eyebrows", "Mouth_Closed",
      "Smiling", "Big_Lips", "Big_Nose", "Pointy_Nose", "Heavy_Makeup", "Wearing_Hat",
      "Wearing_Earrings", "Wearing_Necktie", "Wearing_Lipstick", "No_Eyewear", "Eyeglasses",
      "Attractive"};
  return names;
}

std::vector<SynthAttribute> maad_like_attributes() {
  std::vector<SynthAttribute> attrs;
  const auto& names = maad_attribute_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    // Marginals spread over [0.15, 0.85] by a golden-ratio sequence.
    const double frac = std::fmod(0.5 + static_cast<double>(i) * 0.6180339887498949, 1.0);
    attrs.push_back({names[i], PerSubjectProb{0.15 + 0.7 * frac}, NoEffect{}, Granularity::PerSubject});
  }
  auto set = [&](const std::string& name, Assignment as, Effect ef = NoEffect{}) {
    auto it = std::find_if(attrs.begin(), attrs.end(), [&](const SynthAttribute& a) { return a.name == name; });
    it->assignment = std::move(as);
    it->effect = std::move(ef);
  };
  set("No_Beard", CorrelatedWith{"Male", -0.6});
  set("Heavy_Makeup", CorrelatedWith{"Male", -0.5});
  set("Wearing_Lipstick", CorrelatedWith{"Heavy_Makeup", 0.7});
  set("Eyeglasses", CorrelatedWith{"No_Eyewear", -0.9});
  set("Senior", PerSubjectProb{0.2}, ExtraNoise{0.05});
  set("Wearing_Hat", PerSubjectProb{0.3}, ExtraNoise{0.1});
  set("Smiling", PerSubjectProb{0.5});
  attrs[static_cast<std::size_t>(std::find(names.begin(), names.end(), "Smiling") - names.begin())].granularity =
      Granularity::PerSample;
  return attrs;
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"planted", "null", "imbalance", "maad"};
  return names;
}

SynthConfig preset(const std::string& name, std::uint64_t seed) {
  SynthConfig cfg;
  cfg.seed = seed;
  cfg.n_subjects = 200;
  cfg.samples_per_subject = 10;
  cfg.dim = 64;
  if (name == "planted") {
    cfg.base_noise = 0.1;
    cfg.attributes = {{"Planted", PerSubjectProb{0.5}, ExtraNoise{0.3}, Granularity::PerSubject}};
  } else if (name == "null") {
    cfg.base_noise = 0.2;
    cfg.attributes = {{"Null", PerSubjectProb{0.5}, NoEffect{}, Granularity::PerSubject}};
  } else if (name == "imbalance") {
    cfg.base_noise = 0.2;
    cfg.attributes = {{"Rare", PerSubjectProb{0.025}, CountSkew{0.3}, Granularity::PerSubject}};
  } else if (name == "maad") {
    cfg.n_subjects = 120;
    cfg.samples_per_subject = 8;
    cfg.dim = 32;
    cfg.base_noise = 0.2;
    cfg.attributes = maad_like_attributes();
  } else {
    invalid("unknown synth preset '" + name + "'");
  }
  return cfg;
}

}  // namespace attrbias::synth
