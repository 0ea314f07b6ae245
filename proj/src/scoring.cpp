#include "attrbias/scoring.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "attrbias/error.hpp"
#include "attrbias/kernels.hpp"

namespace attrbias {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_scores(const ScoreSet& s) {
  if (s.genuine.empty() || s.impostor.empty()) {
    throw Error(ErrorCode::EmptyScores, "genuine and impostor score lists must be nonempty");
  }
}

std::vector<double> score_list(const Dataset& ds, std::span<const Pair> pairs) {
  for (const auto& p : pairs) {
    if (p.a >= ds.size() || p.b >= ds.size()) {
      throw Error(ErrorCode::UnknownSample, "pair references a sample outside the dataset");
    }
  }
  std::vector<double> out(pairs.size());
  kernels::score_pairs(ds.embeddings(), ds.dim(), pairs, out);
  for (double& v : out) v = std::clamp(v, -1.0, 1.0);
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t count_below(const std::vector<double>& sorted, double t) {
  return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), t) - sorted.begin());
}

}  // namespace

ScoreSet score_pairs(const Dataset& ds, const PairSet& pairs) {
  return {score_list(ds, pairs.genuine), score_list(ds, pairs.impostor)};
}

double fnmr_at_threshold(const ScoreSet& s, double threshold) {
  require_scores(s);
  return static_cast<double>(count_below(s.genuine, threshold)) / static_cast<double>(s.genuine.size());
}

double fmr_at_threshold(const ScoreSet& s, double threshold) {
  require_scores(s);
  const std::size_t m = s.impostor.size();
  return static_cast<double>(m - count_below(s.impostor, threshold)) / static_cast<double>(m);
}

EerResult eer_point(const ScoreSet& s) {
  require_scores(s);
  const auto n = s.genuine.size();
  const auto m = s.impostor.size();
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);

  // Sweep distinct scores ascending; g / i count genuine / impostor below t.
  std::size_t g = 0;
  std::size_t i = 0;
  double prev_fnmr = 0.0;
  double prev_fmr = 1.0;
  bool have_prev = false;
  for (;;) {
    double t = kInf;
    if (g < n) t = s.genuine[g];
    if (i < m) t = std::min(t, s.impostor[i]);
    const double fnmr = static_cast<double>(g) / dn;
    const double fmr = static_cast<double>(m - i) / dm;
    if (fnmr >= fmr) {
      if (!have_prev || fnmr == fmr) return {fnmr, t};
      const double d0 = prev_fmr - prev_fnmr;
      const double d1 = fnmr - fmr;
      const double alpha = d0 / (d0 + d1);
      return {prev_fnmr + alpha * (fnmr - prev_fnmr), t};
    }
    // t = +inf always satisfies fnmr (1) >= fmr (0), so t is finite here.
    prev_fnmr = fnmr;
    prev_fmr = fmr;
    have_prev = true;
    while (g < n && s.genuine[g] <= t) ++g;
    while (i < m && s.impostor[i] <= t) ++i;
  }
}

bool impostors_sufficient(std::size_t impostor_count, double target_fmr) {
  return static_cast<double>(impostor_count) >= 10.0 / target_fmr;
}

FnmrAtFmrResult fnmr_at_fmr(const ScoreSet& s, double target_fmr) {
  require_scores(s);
  if (!(target_fmr > 0.0 && target_fmr < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "target FMR must lie in (0,1)");
  }
  const std::size_t m = s.impostor.size();
  const double dm = static_cast<double>(m);

  // Largest number of accepted impostors with count / m <= target.
  auto allowed = static_cast<std::size_t>(std::floor(target_fmr * dm));
  while (allowed + 1 <= m && static_cast<double>(allowed + 1) / dm <= target_fmr) ++allowed;
  while (allowed > 0 && static_cast<double>(allowed) / dm > target_fmr) --allowed;

  FnmrAtFmrResult r;
  r.underpowered = !impostors_sufficient(m, target_fmr);
  if (allowed >= m) {
    r.threshold = std::min(s.genuine.front(), s.impostor.front());
    r.fnmr = 0.0;
    r.achieved_fmr = 1.0;
    return r;
  }
  // Threshold sits just above the (allowed+1)-th largest impostor score v:
  // the next distinct score above v, or +inf when none exists.
  const double v = s.impostor[m - allowed - 1];
  const auto g_above = std::upper_bound(s.genuine.begin(), s.genuine.end(), v);
  const auto i_above = std::upper_bound(s.impostor.begin(), s.impostor.end(), v);
  double t = kInf;
  if (g_above != s.genuine.end()) t = *g_above;
  if (i_above != s.impostor.end()) t = std::min(t, *i_above);
  r.threshold = t;
  r.fnmr = static_cast<double>(g_above - s.genuine.begin()) / static_cast<double>(s.genuine.size());
  r.achieved_fmr = static_cast<double>(s.impostor.end() - i_above) / dm;
  return r;
}

GlobalThresholds global_thresholds(const ScoreSet& reference, std::span<const OperatingPoint> ops) {
  GlobalThresholds g;
  for (const auto& op : ops) {
    g.threshold[op] = op.kind == OpKind::Eer ? eer_point(reference).threshold
                                             : fnmr_at_fmr(reference, op.target_fmr).threshold;
  }
  return g;
}

GroupMetrics metrics_from_scores(const ScoreSet& s, std::span<const OperatingPoint> ops,
                                 const GlobalThresholds* global) {
  require_scores(s);
  GroupMetrics gm;
  gm.genuine_count = s.genuine.size();
  gm.impostor_count = s.impostor.size();
  for (const auto& op : ops) {
    double value = 0.0;
    if (global) {
      auto it = global->threshold.find(op);
      if (it == global->threshold.end()) {
        throw Error(ErrorCode::InvalidConfig, "no global threshold for " + op.name());
      }
      const double t = it->second;
      value = op.kind == OpKind::Eer ? 0.5 * (fnmr_at_threshold(s, t) + fmr_at_threshold(s, t))
                                     : fnmr_at_threshold(s, t);
    } else {
      value = op.kind == OpKind::Eer ? eer(s) : fnmr_at_fmr(s, op.target_fmr).fnmr;
    }
    gm.errors[op] = value;
    if (op.kind == OpKind::FnmrAtFmr && !impostors_sufficient(s.impostor.size(), op.target_fmr)) {
      gm.underpowered.push_back(op);
    }
  }
  return gm;
}

GroupMetrics group_metrics(const Dataset& ds, std::span<const std::uint32_t> group,
                           const PairConfig& cfg, std::span<const OperatingPoint> ops,
                           const GlobalThresholds* global) {
  const auto pairs = pairs_for_group(ds, group, cfg);
  return metrics_from_scores(score_pairs(ds, pairs), ops, global);
}

namespace {

template <typename UInt>
void put_uint(std::string& out, UInt value) {
  for (std::size_t k = 0; k < sizeof(UInt); ++k) out.push_back(static_cast<char>((value >> (8 * k)) & 0xFF));
}

template <typename UInt>
UInt get_uint(std::istream& in, const std::filesystem::path& path) {
  unsigned char buf[sizeof(UInt)];
  in.read(reinterpret_cast<char*>(buf), sizeof buf);
  if (in.gcount() != static_cast<std::streamsize>(sizeof buf)) {
    throw Error(ErrorCode::MalformedHeader, path.string() + ": truncated score dump");
  }
  UInt v = 0;
  for (std::size_t k = 0; k < sizeof(UInt); ++k) v |= static_cast<UInt>(buf[k]) << (8 * k);
  return v;
}

}  // namespace

void write_score_dump(const ScoreSet& s, const std::filesystem::path& path) {
  std::string out = "BPSC";
  put_uint<std::uint64_t>(out, s.genuine.size());
  put_uint<std::uint64_t>(out, s.impostor.size());
  for (const auto* list : {&s.genuine, &s.impostor}) {
    for (double v : *list) put_uint<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!os) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

ScoreSet read_score_dump(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open score dump " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  if (in.gcount() != 4 || std::string(magic, 4) != "BPSC") {
    throw Error(ErrorCode::MalformedHeader, path.string() + ": bad magic");
  }
  const auto ng = get_uint<std::uint64_t>(in, path);
  const auto ni = get_uint<std::uint64_t>(in, path);
  ScoreSet s;
  for (auto [list, count] : {std::pair{&s.genuine, ng}, std::pair{&s.impostor, ni}}) {
    for (std::uint64_t k = 0; k < count; ++k) {
      list->push_back(std::bit_cast<float>(get_uint<std::uint32_t>(in, path)));
    }
  }
  return s;
}

}  // namespace attrbias
