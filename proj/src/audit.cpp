#include "attrbias/audit.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "attrbias/error.hpp"
#include "attrbias/rng.hpp"

namespace attrbias {

namespace {

bool is_too_small(const Error& e) {
  return e.code() == ErrorCode::NoGenuinePairs || e.code() == ErrorCode::NoImpostorPairs;
}

MaybeValue ratio_complement(double num, double den) {
  if (den > 0.0) return 1.0 - num / den;
  if (num == 0.0) return 0.0;
  return std::nullopt;
}

std::string polarity_name(Polarity p) { return p == Polarity::Positive ? "positive" : "negative"; }

// Returns nullopt when the redraw budget is exhausted.
std::optional<ControlResult> evaluate_controls(const Dataset& ds, const std::string& attribute,
                                               Polarity polarity, std::size_t size,
                                               const AuditConfig& cfg,
                                               const GlobalThresholds* global) {
  ControlResult cr;
  cr.k = cfg.control_replicates;
  cr.polarity = polarity;
  cr.group_size = size;
  for (int r = 0; r < cfg.control_replicates; ++r) {
    for (int attempt = 0;; ++attempt) {
      if (attempt > cfg.control_redraws) return std::nullopt;
      const auto group = draw_control_group(ds, size, control_seed(cfg.seed, attribute, polarity, r, attempt));
      try {
        cr.replicates.push_back(group_metrics(ds, group, cfg.pairs, cfg.ops, global));
        break;
      } catch (const Error& e) {
        if (!is_too_small(e)) throw;
        ++cr.redraws;
      }
    }
  }
  for (const auto& op : cfg.ops) {
    double sum = 0.0;
    for (const auto& rep : cr.replicates) sum += rep.errors.at(op);
    cr.per_op_mean_error[op] = sum / static_cast<double>(cr.replicates.size());
  }
  return cr;
}

}  // namespace

std::pair<SampleGroup, SampleGroup> attribute_groups(const Dataset& ds, const std::string& attribute) {
  const auto idx = ds.attribute_index(attribute);
  if (!idx) throw Error(ErrorCode::UnknownAttribute, "unknown attribute '" + attribute + "'");
  SampleGroup pos;
  SampleGroup neg;
  const auto labels = ds.labels(*idx);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == Label::Positive) pos.push_back(static_cast<std::uint32_t>(i));
    if (labels[i] == Label::Negative) neg.push_back(static_cast<std::uint32_t>(i));
  }
  return {std::move(pos), std::move(neg)};
}

SampleGroup draw_control_group(const Dataset& ds, std::size_t size, std::uint64_t seed) {
  if (size == 0) throw Error(ErrorCode::InvalidConfig, "control group size must be positive");
  if (size > ds.size()) {
    throw Error(ErrorCode::SizeExceedsDataset, "control group of " + std::to_string(size) +
                                                   " exceeds dataset of " + std::to_string(ds.size()));
  }
  CounterRng rng(seed);
  SampleGroup group;
  group.reserve(size);
  for (auto v : sample_without_replacement(rng, ds.size(), size)) {
    group.push_back(static_cast<std::uint32_t>(v));
  }
  std::sort(group.begin(), group.end());
  return group;
}

std::vector<SampleGroup> build_control_groups(const Dataset& ds, std::size_t size, int k,
                                              std::uint64_t seed) {
  if (k <= 0) throw Error(ErrorCode::InvalidConfig, "number of control groups must be positive");
  std::vector<SampleGroup> groups;
  groups.reserve(static_cast<std::size_t>(k));
  for (int r = 0; r < k; ++r) {
    groups.push_back(draw_control_group(ds, size, hash_combine(seed, static_cast<std::uint64_t>(r))));
  }
  return groups;
}

MaybeValue relative_performance(double err_pos, double err_neg) {
  return ratio_complement(err_pos, err_neg);
}

MaybeValue validity(double err_pos_control, double err_neg_control, ValidityForm form) {
  const auto rel = ratio_complement(err_pos_control, err_neg_control);
  if (!rel) return std::nullopt;
  return validity_from_relative(*rel, form);
}

double validity_from_relative(double control_rel_perf, ValidityForm form) {
  return form == ValidityForm::Absolute ? 1.0 - std::abs(control_rel_perf) : control_rel_perf;
}

std::uint64_t control_seed(std::uint64_t seed, const std::string& attribute, Polarity polarity,
                           int replicate, int attempt) {
  std::uint64_t h = derive_key(fnv1a(attribute),
                               {polarity == Polarity::Positive ? 1u : 2u,
                                static_cast<std::uint64_t>(replicate)});
  if (attempt > 0) h = hash_combine(h, static_cast<std::uint64_t>(attempt));
  return seed ^ h;
}

AttributeReport audit_attribute(const Dataset& ds, const std::string& attribute,
                                const AuditConfig& cfg, const GlobalThresholds* global) {
  if (cfg.control_replicates <= 0) {
    throw Error(ErrorCode::InvalidConfig, "control_replicates must be positive");
  }
  auto [pos, neg] = attribute_groups(ds, attribute);
  AttributeReport rep;
  rep.attribute = attribute;
  rep.positive_count = pos.size();
  rep.negative_count = neg.size();

  for (auto [group, polarity] : {std::pair{&pos, Polarity::Positive}, std::pair{&neg, Polarity::Negative}}) {
    try {
      auto gm = group_metrics(ds, *group, cfg.pairs, cfg.ops, global);
      (polarity == Polarity::Positive ? rep.real_pos : rep.real_neg) = std::move(gm);
    } catch (const Error& e) {
      if (!is_too_small(e)) throw;
      rep.skip_reason = "GroupTooSmall: " + polarity_name(polarity) + " group: " + e.what();
      return rep;
    }
  }

  for (auto [size, polarity] : {std::pair{pos.size(), Polarity::Positive}, std::pair{neg.size(), Polarity::Negative}}) {
    auto cr = evaluate_controls(ds, attribute, polarity, size, cfg, global);
    if (!cr) {
      rep.skip_reason = "GroupTooSmall: " + polarity_name(polarity) +
                        " control draws of size " + std::to_string(size) +
                        " repeatedly lacked genuine or impostor pairs";
      return rep;
    }
    (polarity == Polarity::Positive ? rep.control_pos : rep.control_neg) = std::move(*cr);
  }

  for (const auto& op : cfg.ops) {
    rep.rel_perf[op] = relative_performance(rep.real_pos.errors.at(op), rep.real_neg.errors.at(op));
    const double cp = rep.control_pos.per_op_mean_error.at(op);
    const double cn = rep.control_neg.per_op_mean_error.at(op);
    rep.control_rel_perf[op] = relative_performance(cp, cn);
    rep.validity[op] = validity(cp, cn, cfg.validity_form);
    rep.valid[op] = rep.validity[op].has_value() && *rep.validity[op] >= cfg.validity_threshold;
  }
  if (auto it = rep.valid.find(cfg.summary_op); it != rep.valid.end()) {
    rep.summary_valid = it->second;
  } else {
    rep.summary_valid = std::all_of(rep.valid.begin(), rep.valid.end(), [](const auto& kv) { return kv.second; });
  }
  return rep;
}

GlobalThresholds dataset_thresholds(const Dataset& ds, const AuditConfig& cfg) {
  SampleGroup all(ds.size());
  std::iota(all.begin(), all.end(), std::uint32_t{0});
  const auto pairs = pairs_for_group(ds, all, cfg.pairs);
  return global_thresholds(score_pairs(ds, pairs), cfg.ops);
}

std::vector<AttributeReport> audit_all(const Dataset& ds, const AuditConfig& cfg) {
  std::optional<GlobalThresholds> global;
  if (cfg.threshold_scope == ThresholdScope::Global) global = dataset_thresholds(ds, cfg);
  const GlobalThresholds* gp = global ? &*global : nullptr;

  const auto& names = ds.attribute_names();
  std::vector<AttributeReport> reports(names.size());
  std::vector<std::exception_ptr> failures(names.size());
  const auto n = static_cast<std::int64_t>(names.size());
#ifdef _OPENMP
  const int threads = cfg.workers > 0 ? cfg.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
#endif
  for (std::int64_t a = 0; a < n; ++a) {
    const auto i = static_cast<std::size_t>(a);
    try {
      reports[i] = audit_attribute(ds, names[i], cfg, gp);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return reports;
}

}  // namespace attrbias
