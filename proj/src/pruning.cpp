#include "locprune/pruning.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "locprune/prefix_sums.hpp"

namespace locprune {
namespace {

using Mask = std::uint32_t;

double parse_double(std::string_view s, std::string_view whole) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InvalidArgument("bad number in penalty '" + std::string(whole) + "'");
  }
  return v;
}

double floored_log_rss(double total_rss, std::int64_t n) {
  const double nd = static_cast<double>(n);
  return 0.5 * nd * std::log(std::max(total_rss, nd * kRssFloorPerObservation) / nd);
}

void check_breaks(std::int64_t n, std::span<const std::int64_t> breaks) {
  std::int64_t prev = 0;
  for (auto b : breaks) {
    if (b <= prev || b >= n) throw InvalidArgument("change points must be strictly increasing within [1, n-1]");
    prev = b;
  }
}

std::vector<std::int64_t> sorted_union(std::span<const std::int64_t> a, std::span<const std::int64_t> b) {
  std::vector<std::int64_t> out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw InvalidArgument("context sets overlap");
  }
  return out;
}

// Candidates held fixed while D is pruned: accepted ones plus active ones
// outside D. None may fall inside (c_left, c_right).
std::vector<std::int64_t> fixed_set(std::span<const std::int64_t> d, const PruneContext& ctx) {
  std::vector<std::int64_t> rest;
  for (auto c : ctx.active) {
    if (!std::binary_search(d.begin(), d.end(), c)) rest.push_back(c);
  }
  auto fixed = sorted_union(ctx.accepted, rest);
  for (auto f : fixed) {
    if (f > ctx.c_left && f < ctx.c_right) {
      throw InvalidArgument("fixed candidate " + std::to_string(f) + " lies inside (c_left, c_right)");
    }
  }
  return fixed;
}

// Evaluates SC(A | context) for subsets A of D encoded as bit masks (bit i
// set <=> d[i] in A), using one segment of the fixed partition that is
// refined by A.
// Next mask with the same popcount (Gosper's hack).
Mask next_same_popcount(Mask v) {
  const Mask t = v | (v - 1);
  return (t + 1) | (((~t & -~t) - 1) >> (std::countr_zero(v) + 1));
}

template <typename Visit>
void for_each_mask_with_popcount(int k, int level, Visit&& visit) {
  if (level == 0) {
    visit(Mask{0});
    return;
  }
  const std::uint64_t limit = std::uint64_t{1} << k;
  for (std::uint64_t m = (std::uint64_t{1} << level) - 1; m < limit; m = next_same_popcount(static_cast<Mask>(m))) {
    visit(static_cast<Mask>(m));
    if (m == ((std::uint64_t{1} << level) - 1) << (k - level)) break;
  }
}

class LocalScorer {
 public:
  LocalScorer(const PrefixSums& ps, std::span<const std::int64_t> fixed, std::span<const std::int64_t> d,
              double xi)
      : n_(ps.n()), k_(static_cast<int>(d.size())), xi_(xi), fixed_count_(fixed.size()) {
    std::int64_t seg_left = 0;
    std::int64_t seg_right = n_;
    if (!d.empty()) {
      for (auto f : fixed) {
        if (f < d.front()) seg_left = f;
        if (f > d.back()) {
          seg_right = f;
          break;
        }
      }
    }
    std::int64_t prev = 0;
    auto add_segment = [&](std::int64_t e) {
      if (d.empty() || prev != seg_left) rss_out_ += ps.rss(prev, e);
      prev = e;
    };
    for (auto f : fixed) add_segment(f);
    add_segment(n_);

    // Point 0 is seg_left, points 1..k are D, point k+1 is seg_right.
    std::vector<std::int64_t> pts{seg_left};
    pts.insert(pts.end(), d.begin(), d.end());
    pts.push_back(seg_right);
    width_ = k_ + 2;
    pair_.assign(static_cast<std::size_t>(width_ * width_), 0.0);
    gain_.assign(pair_.size(), -std::numeric_limits<double>::infinity());
    for (int i = 0; i < width_; ++i) {
      for (int j = i + 1; j < width_; ++j) pair_[idx(i, j)] = ps.rss(pts[i], pts[j]);
    }
    for (int i = 0; i < width_; ++i) {
      for (int j = i + 2; j < width_; ++j) {
        double& g = gain_[idx(i, j)];
        for (int c = i + 1; c < j; ++c) g = std::max(g, pair_[idx(i, j)] - pair_[idx(i, c)] - pair_[idx(c, j)]);
      }
    }
    shrink_ = std::exp(-2.0 * xi / static_cast<double>(n_));
    floor_ = static_cast<double>(n_) * kRssFloorPerObservation;
  }

  int size() const noexcept { return k_; }

  double score(Mask mask) const {
    double local = 0.0;
    int prev = 0;
    for (Mask m = mask; m != 0; m &= m - 1) {
      const int i = std::countr_zero(m) + 1;
      local += pair_[idx(prev, i)];
      prev = i;
    }
    local += pair_[idx(prev, k_ + 1)];
    return floored_log_rss(rss_out_ + local, n_) +
           static_cast<double>(static_cast<std::size_t>(std::popcount(mask)) + fixed_count_) * xi_;
  }

  // Bit m of the result is set when no single candidate added to subset m
  // lowers its SC.
  std::vector<std::uint64_t> good_subsets() const {
    std::vector<std::uint64_t> bits(std::max<std::size_t>(1, (std::size_t{1} << k_) / 64), 0);
    visit(bits, 0, 0, 0.0, -std::numeric_limits<double>::infinity());
    return bits;
  }

 private:
  std::size_t idx(int i, int j) const noexcept { return static_cast<std::size_t>(i * width_ + j); }

  // SC(A + c) < SC(A) reduces to comparing floored RSS values up to the
  // factor exp(-2 xi / n).
  bool improvable(double rss, double best_gain) const {
    return std::max(rss - best_gain, floor_) < std::max(rss, floor_) * shrink_;
  }

  // Depth-first over subsets by increasing highest element. `head` is the RSS
  // of the closed segments up to point `last`, `head_gain` the best single
  // split gain among them.
  void visit(std::vector<std::uint64_t>& bits, Mask mask, int last, double head, double head_gain) const {
    const double total = rss_out_ + head + pair_[idx(last, k_ + 1)];
    const double gain = std::max(head_gain, gain_[idx(last, k_ + 1)]);
    if (!improvable(total, gain)) bits[mask >> 6] |= std::uint64_t{1} << (mask & 63);
    for (int b = last; b < k_; ++b) {
      const Mask next = mask | (Mask{1} << b);
      visit(bits, next, b + 1, head + pair_[idx(last, b + 1)], std::max(head_gain, gain_[idx(last, b + 1)]));
    }
  }

  std::int64_t n_;
  int k_;
  int width_ = 0;
  double xi_;
  std::size_t fixed_count_;
  double rss_out_ = 0.0;
  double shrink_ = 1.0;
  double floor_ = 0.0;
  std::vector<double> pair_;
  std::vector<double> gain_;  // best RSS reduction from one split strictly inside (i, j)
};

// Subsets surviving the monotonicity criterion: all of their supersets are
// good. This is what the top-down flag propagation computes.
struct FeasibleSets {
  std::vector<std::uint64_t> bits;
  int k = 0;
  int m_star = 0;

  bool contains(Mask m) const { return (bits[m >> 6] >> (m & 63)) & 1U; }
};

FeasibleSets feasible_subsets(const LocalScorer& scorer) {
  FeasibleSets out;
  out.k = scorer.size();
  out.bits = scorer.good_subsets();
  auto& w = out.bits;
  // AND over supersets, one coordinate at a time.
  static constexpr std::uint64_t kHigh[6] = {0xAAAAAAAAAAAAAAAAULL, 0xCCCCCCCCCCCCCCCCULL, 0xF0F0F0F0F0F0F0F0ULL,
                                             0xFF00FF00FF00FF00ULL, 0xFFFF0000FFFF0000ULL, 0xFFFFFFFF00000000ULL};
  for (int b = 0; b < std::min(out.k, 6); ++b) {
    for (auto& word : w) word &= (word >> (1U << b)) | kHigh[b];
  }
  for (int b = 6; b < out.k; ++b) {
    const std::size_t step = std::size_t{1} << (b - 6);
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!(i & step)) w[i] &= w[i | step];
    }
  }
  // The full set has no supersets besides itself, so the family is never empty.
  out.m_star = out.k;
  for (int level = 0; level < out.k; ++level) {
    bool found = false;
    for_each_mask_with_popcount(out.k, level, [&](Mask m) { found = found || out.contains(m); });
    if (found) {
      out.m_star = level;
      break;
    }
  }
  return out;
}

std::vector<std::int64_t> mask_to_locations(Mask m, std::span<const std::int64_t> d) {
  std::vector<std::int64_t> out;
  for (Mask bits = m; bits != 0; bits &= bits - 1) out.push_back(d[static_cast<std::size_t>(std::countr_zero(bits))]);
  return out;
}

// Canonical preference among subsets with equal SC: fewer elements first,
// then the lexicographically smallest location list.
bool better_subset(double sc_a, Mask a, double sc_b, Mask b, std::span<const std::int64_t> d) {
  if (sc_a != sc_b) return sc_a < sc_b;
  const int ca = std::popcount(a);
  const int cb = std::popcount(b);
  if (ca != cb) return ca < cb;
  return mask_to_locations(a, d) < mask_to_locations(b, d);
}

// Scores are recomputed here since only a few subsets take part.
Mask select_localised(const FeasibleSets& fs, const LocalScorer& scorer, std::span<const std::int64_t> d) {
  bool have = false;
  Mask best = 0;
  double best_sc = 0.0;
  auto consider = [&](Mask m) {
    const double v = scorer.score(m);
    if (!have || better_subset(v, m, best_sc, best, d)) {
      have = true;
      best = m;
      best_sc = v;
    }
  };
  for (int level = fs.m_star; level <= std::min(fs.m_star + 2, fs.k); ++level) {
    for_each_mask_with_popcount(fs.k, level, [&](Mask m) {
      if (!fs.contains(m)) return;
      consider(m);
      if (m == 0) return;
      const Mask lowest = m & -m;
      const Mask highest = Mask{1} << (31 - std::countl_zero(m));
      consider(m ^ lowest);
      consider(m ^ highest);
      consider(m & ~(lowest | highest));
    });
  }
  return best;
}

void check_cap(std::size_t size, std::size_t cap) {
  if (cap > 30) throw InvalidArgument("pruning cap above 30 is not supported");
  if (size > cap) {
    throw CapExceeded("pruning set of size " + std::to_string(size) + " exceeds cap " + std::to_string(cap),
                      size, cap);
  }
}

}  // namespace

Penalty Penalty::parse(std::string_view text) {
  if (text == "log1.01") return log_pow(1.01);
  if (text == "log1.1" || text == "light") return log_pow(1.1);
  if (text == "heavy_t") return poly(2.0 / 4.99);
  if (text == "heavy_ar") return log_pow(2.0);
  if (text.starts_with("xi:")) return fixed(parse_double(text.substr(3), text));
  if (text.starts_with("log_pow:")) return log_pow(parse_double(text.substr(8), text));
  if (text.starts_with("poly:")) return poly(parse_double(text.substr(5), text));
  throw InvalidArgument("unknown penalty '" + std::string(text) + "'");
}

double Penalty::evaluate(std::int64_t n) const {
  const double nd = static_cast<double>(n);
  double xi = 0.0;
  switch (kind) {
    case Kind::Fixed: xi = value; break;
    case Kind::LogPow: xi = std::pow(std::log(nd), value); break;
    case Kind::Poly: xi = std::pow(nd, value); break;
  }
  if (!(xi > 0.0) || !std::isfinite(xi)) throw InvalidArgument("penalty must be positive");
  return xi;
}

std::string Penalty::to_string() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::Fixed: os << "xi:" << value; break;
    case Kind::LogPow: os << "log_pow:" << value; break;
    case Kind::Poly: os << "poly:" << value; break;
  }
  return os.str();
}

SortKind parse_sort_kind(std::string_view text) {
  if (text == "jump" || text == "h_J") return SortKind::Jump;
  if (text == "pvalue" || text == "inv_p_value" || text == "h_P") return SortKind::InvPValue;
  throw InvalidArgument("unknown sort key '" + std::string(text) + "' (expected jump or pvalue)");
}

const char* to_string(SortKind s) noexcept { return s == SortKind::Jump ? "jump" : "pvalue"; }

double rss(const TimeSeries& x, std::span<const std::int64_t> breaks) {
  check_breaks(x.n(), breaks);
  const auto v = x.values();
  double total = 0.0;
  std::int64_t start = 0;
  auto segment = [&](std::int64_t end) {
    double mean = 0.0;
    for (std::int64_t t = start; t < end; ++t) mean += v[static_cast<std::size_t>(t)];
    mean /= static_cast<double>(end - start);
    for (std::int64_t t = start; t < end; ++t) {
      const double d = v[static_cast<std::size_t>(t)] - mean;
      total += d * d;
    }
    start = end;
  };
  for (auto b : breaks) segment(b);
  segment(x.n());
  return total;
}

double sc(const TimeSeries& x, std::span<const std::int64_t> breaks, double xi) {
  return floored_log_rss(rss(x, breaks), x.n()) + static_cast<double>(breaks.size()) * xi;
}

double sc_conditional(const TimeSeries& x, std::span<const std::int64_t> subset, const PruneContext& ctx,
                      double xi) {
  std::vector<std::int64_t> d;
  for (auto c : ctx.active) {
    if (c > ctx.c_left && c < ctx.c_right) d.push_back(c);
  }
  std::sort(d.begin(), d.end());
  for (auto a : subset) {
    if (!std::binary_search(d.begin(), d.end(), a)) {
      throw InvalidArgument("subset element " + std::to_string(a) + " is not an active candidate in (c_left, c_right)");
    }
  }
  auto fixed = fixed_set(d, ctx);
  auto all = sorted_union(fixed, subset);
  return sc(x, all, xi);
}

std::vector<std::int64_t> prun_alg(const TimeSeries& x, std::span<const std::int64_t> d, const PruneContext& ctx,
                                   double xi, std::size_t cap) {
  check_cap(d.size(), cap);
  if (!std::is_sorted(d.begin(), d.end()) || std::adjacent_find(d.begin(), d.end()) != d.end()) {
    throw InvalidArgument("D must be sorted without duplicates");
  }
  for (auto c : d) {
    if (c <= ctx.c_left || c >= ctx.c_right) throw InvalidArgument("D must lie inside (c_left, c_right)");
  }
  if (d.empty()) return {};
  PrefixSums ps(x.values());
  const auto fixed = fixed_set(d, ctx);
  const LocalScorer scorer(ps, fixed, d, xi);
  return mask_to_locations(select_localised(feasible_subsets(scorer), scorer, d), d);
}

double jump_size(const TimeSeries& x, std::int64_t c, std::int64_t g_left, std::int64_t g_right) {
  if (g_left < 1 || g_right < 1 || c - g_left < 0 || c + g_right > x.n()) {
    throw InvalidArgument("detection interval must lie inside (0, n]");
  }
  const auto v = x.values();
  double left = 0.0;
  double right = 0.0;
  for (std::int64_t t = c - g_left; t < c; ++t) left += v[static_cast<std::size_t>(t)];
  for (std::int64_t t = c; t < c + g_right; ++t) right += v[static_cast<std::size_t>(t)];
  return std::abs(left / static_cast<double>(g_left) - right / static_cast<double>(g_right));
}

double sort_value(const Candidate& c, SortKind kind) {
  if (kind == SortKind::Jump) return c.jump;
  const double p = std::max(c.p_value.value_or(1.0), std::numeric_limits<double>::min());
  return 1.0 / p;
}

Segmentation make_segmentation(const TimeSeries& x, std::vector<std::int64_t> changepoints, double xi) {
  std::sort(changepoints.begin(), changepoints.end());
  check_breaks(x.n(), changepoints);
  Segmentation seg;
  seg.n = x.n();
  seg.xi = xi;
  const auto v = x.values();
  std::int64_t start = 0;
  auto bounds = changepoints;
  bounds.push_back(x.n());
  for (auto end : bounds) {
    double mean = 0.0;
    for (std::int64_t t = start; t < end; ++t) mean += v[static_cast<std::size_t>(t)];
    seg.segment_means.push_back(mean / static_cast<double>(end - start));
    start = end;
  }
  seg.changepoints = std::move(changepoints);
  seg.rss = rss(x, seg.changepoints);
  seg.sc = floored_log_rss(seg.rss, x.n()) + static_cast<double>(seg.changepoints.size()) * xi;
  return seg;
}

Segmentation loc_alg(const TimeSeries& x, const CandidateSet& candidates, double xi, const LocAlgOptions& options) {
  const std::int64_t n = x.n();
  if (candidates.n != 0 && candidates.n != n) throw InvalidArgument("candidate set belongs to a different series");
  check_cap(0, options.cap);
  const auto& cands = candidates.candidates;
  std::map<std::int64_t, std::size_t> index_of;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const auto& c = cands[i];
    if (c.location < 1 || c.location > n - 1) throw InvalidArgument("candidate location outside [1, n-1]");
    if (c.g_left < 1 || c.g_right < 1 || c.location - c.g_left < 0 || c.location + c.g_right > n) {
      throw InvalidArgument("candidate detection interval outside (0, n]");
    }
    if (!index_of.emplace(c.location, i).second) throw InvalidArgument("duplicate candidate location");
  }

  std::vector<double> h(cands.size());
  for (std::size_t i = 0; i < cands.size(); ++i) h[i] = sort_value(cands[i], options.sort);
  std::vector<std::size_t> ranked(cands.size());
  for (std::size_t i = 0; i < ranked.size(); ++i) ranked[i] = i;
  auto rank_before = [&](std::size_t a, std::size_t b) {
    if (h[a] != h[b]) return h[a] > h[b];
    const auto wa = cands[a].g_left + cands[a].g_right;
    const auto wb = cands[b].g_left + cands[b].g_right;
    if (wa != wb) return wa < wb;
    if (cands[a].g_left != cands[b].g_left) return cands[a].g_left < cands[b].g_left;
    return cands[a].location < cands[b].location;
  };
  std::sort(ranked.begin(), ranked.end(), rank_before);

  PrefixSums ps(x.values());
  std::set<std::int64_t> active;
  std::set<std::int64_t> accepted;
  for (const auto& c : cands) active.insert(c.location);
  std::deque<std::size_t> order(ranked.begin(), ranked.end());

  Segmentation result;
  std::vector<CandidateAudit> audit;
  std::vector<std::string> warnings;
  std::int64_t iteration = 0;
  std::size_t deferrals = 0;

  while (!active.empty()) {
    const std::size_t idx = order.front();
    order.pop_front();
    const Candidate& c0 = cands[idx];
    if (!active.contains(c0.location)) continue;

    // Step 2: local search environment.
    std::int64_t c_left = 0;
    bool left_fixed_by_accepted = true;
    {
      auto it_acc = accepted.lower_bound(c0.location);
      const std::int64_t acc_left = it_acc == accepted.begin() ? 0 : *std::prev(it_acc);
      c_left = acc_left;
      for (auto it = active.lower_bound(c0.location); it != active.begin();) {
        --it;
        if (*it <= acc_left) break;
        const auto& c = cands[index_of.at(*it)];
        if (c0.location - c.location >= c.g_right + c0.g_left) {
          c_left = c.location;
          left_fixed_by_accepted = false;
          break;
        }
      }
    }
    std::int64_t c_right = n;
    bool right_fixed_by_accepted = true;
    {
      auto it_acc = accepted.upper_bound(c0.location);
      const std::int64_t acc_right = it_acc == accepted.end() ? n : *it_acc;
      c_right = acc_right;
      for (auto it = active.upper_bound(c0.location); it != active.end() && *it < acc_right; ++it) {
        const auto& c = cands[index_of.at(*it)];
        if (c.location - c0.location >= c0.g_right + c.g_left) {
          c_right = c.location;
          right_fixed_by_accepted = false;
          break;
        }
      }
    }
    std::vector<std::int64_t> d(active.upper_bound(c_left), active.lower_bound(c_right));

    if (d.size() > options.cap) {
      if (deferrals < active.size()) {
        order.push_back(idx);
        ++deferrals;
        continue;
      }
      // Every active candidate has too many competitors: keep the cap
      // candidates with the largest h (c0 included) and drop the rest.
      std::vector<std::size_t> by_rank;
      for (auto loc : d) by_rank.push_back(index_of.at(loc));
      std::sort(by_rank.begin(), by_rank.end(), rank_before);
      std::set<std::int64_t> keep{c0.location};
      for (auto i : by_rank) {
        if (keep.size() >= options.cap) break;
        keep.insert(cands[i].location);
      }
      std::size_t dropped = 0;
      for (auto loc : d) {
        if (!keep.contains(loc)) {
          active.erase(loc);
          audit.push_back({loc, AuditStatus::Thinned, iteration + 1});
          ++dropped;
        }
      }
      warnings.push_back("thinned " + std::to_string(dropped) + " candidates around " +
                         std::to_string(c0.location) + " to respect the pruning cap");
      d.assign(keep.begin(), keep.end());
    }
    deferrals = 0;
    ++iteration;

    // Step 3.
    PruneContext ctx;
    ctx.active.assign(active.begin(), active.end());
    ctx.accepted.assign(accepted.begin(), accepted.end());
    ctx.c_left = c_left;
    ctx.c_right = c_right;
    const auto fixed = fixed_set(d, ctx);
    const LocalScorer scorer(ps, fixed, d, xi);
    const auto chosen = mask_to_locations(select_localised(feasible_subsets(scorer), scorer, d), d);

    // Step 4: decide which members of D are settled.
    const std::int64_t lo = chosen.empty() ? std::numeric_limits<std::int64_t>::max() : chosen.front();
    const std::int64_t hi = chosen.empty() ? std::numeric_limits<std::int64_t>::min() : chosen.back();
    std::set<std::int64_t> removed{c0.location};
    for (auto loc : d) {
      if (loc >= lo && loc <= hi) removed.insert(loc);
      if (left_fixed_by_accepted && loc < lo) removed.insert(loc);
      if (right_fixed_by_accepted && loc > hi) removed.insert(loc);
    }
    for (auto loc : removed) {
      const bool acc = std::binary_search(chosen.begin(), chosen.end(), loc);
      audit.push_back({loc, acc ? AuditStatus::Accepted : AuditStatus::Discarded, iteration});
      active.erase(loc);
    }
    // Step 5.
    accepted.insert(chosen.begin(), chosen.end());
  }

  result = make_segmentation(x, std::vector<std::int64_t>(accepted.begin(), accepted.end()), xi);
  std::sort(audit.begin(), audit.end(),
            [](const CandidateAudit& a, const CandidateAudit& b) { return a.location < b.location; });
  result.audit = std::move(audit);
  result.warnings = std::move(warnings);
  return result;
}

Segmentation prune_direct(const TimeSeries& x, const CandidateSet& candidates, double xi, std::size_t cap) {
  auto d = candidates.locations();
  check_cap(d.size(), cap);
  std::sort(d.begin(), d.end());
  check_breaks(x.n(), d);
  PrefixSums ps(x.values());
  const LocalScorer scorer(ps, {}, d, xi);
  const auto fs = feasible_subsets(scorer);
  bool have = false;
  Mask best = 0;
  double best_sc = 0.0;
  for_each_mask_with_popcount(fs.k, fs.m_star, [&](Mask m) {
    if (!fs.contains(m)) return;
    const double v = scorer.score(m);
    if (!have || better_subset(v, m, best_sc, best, d)) {
      have = true;
      best = m;
      best_sc = v;
    }
  });
  auto seg = make_segmentation(x, mask_to_locations(best, d), xi);
  for (auto loc : d) {
    const bool acc = std::binary_search(seg.changepoints.begin(), seg.changepoints.end(), loc);
    seg.audit.push_back({loc, acc ? AuditStatus::Accepted : AuditStatus::Discarded, 1});
  }
  return seg;
}

}  // namespace locprune
