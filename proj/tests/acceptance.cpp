// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "htcirc/analysis.hpp"
#include "htcirc/cli.hpp"
#include "oracles.hpp"

using namespace htcirc;

namespace {

constexpr double kRankTolerance = 1e-12;
constexpr double kEntrywiseTolerance = 1e-10;
constexpr std::uint64_t kSeed = 1000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

RunSettings settings(int draws, std::uint64_t seed) {
  RunSettings r;
  r.draws = draws;
  r.seed = seed;
  r.tolerance = kRankTolerance;
  return r;
}

Partition even_odd(int n) { return resolve_partition(CanonicalPartition::even_odd(), n); }
Partition halves(int n) { return resolve_partition(CanonicalPartition::contiguous_halves(), n); }

Outcome cp_bound() {
  const auto start = std::chrono::steady_clock::now();
  const auto parts = all_partitions(6);
  std::size_t checked = 0, violations = 0;
  for (int m : {2, 3}) {
    for (int r0 = 1; r0 <= 5; ++r0) {
      for (int d = 0; d < 100; ++d) {
        const auto t = cp_generate(sample_cp_params({6, m, r0}, draw_seed(kSeed + 1, d)));
        for (const auto& p : parts) {
          ++checked;
          violations += numerical_rank(matricize(t, p), kRankTolerance) > r0;
        }
      }
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream s;
  s << checked << " matricizations over 31 partitions, " << violations << " above r0, " << secs << " s";
  return {parts.size() == 31 && violations == 0 && secs < 60.0, s.str()};
}

Outcome depth_efficiency() {
  const auto start = std::chrono::steady_clock::now();
  const auto r = depth_efficiency_experiment(8, 2, 2, 16, OperatorSpec::arithmetic(), settings(100, 7));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool shallow_ok = true;
  for (std::size_t k = 0; k < r.shallow_max_rank.size(); ++k) {
    shallow_ok = shallow_ok && r.shallow_max_rank[k] <= static_cast<int>(k + 1);
  }
  std::ostringstream s;
  s << r.achieved << "/100 draws at even-odd rank " << r.target_rank << ", shallow needs r0 >= "
    << r.implied_shallow_r0 << ", shallow r0=15 max rank " << r.shallow_max_rank[14] << ", " << secs
    << " s";
  return {r.achieved >= 99 && r.target_rank == 16 && r.implied_shallow_r0 == 16 && shallow_ok &&
              r.shallow_max_rank[14] < 16 && secs < 120.0,
          s.str()};
}

Outcome circuit_equivalence() {
  const int ns[] = {2, 4, 8};
  const int ms[] = {2, 3};
  double worst = 0.0, worst_cp = 0.0;
  std::size_t failures = 0;
  for (int k = 0; k < 50; ++k) {
    const int n = ns[k % 3], m = ms[(k / 3) % 2], width = 1 + k % 3;
    const auto c = sample_circuit(deep_architecture(n, m, width), draw_seed(kSeed + 3, k));
    const auto grid = grid_tensor(c);
    const auto dec = hierarchical_generate(map_to_decomposition(c));
    worst = std::max(worst, relative_error(grid, dec));
    failures += !tensors_close(grid, dec, kEntrywiseTolerance);

    const auto s = sample_circuit(shallow_architecture(n, m, 1 + k % 4), draw_seed(kSeed + 4, k));
    const auto sg = grid_tensor(s);
    const auto cp = cp_generate(map_to_cp(s));
    worst_cp = std::max(worst_cp, relative_error(sg, cp));
    failures += !tensors_close(sg, cp, kEntrywiseTolerance);
  }
  std::ostringstream s;
  s << "50 deep + 50 shallow circuits, worst relative error " << worst << " (deep) " << worst_cp
    << " (CP)";
  return {failures == 0, s.str()};
}

Outcome rectifier_equivalence() {
  double worst = 0.0;
  std::size_t failures = 0;
  const auto op = OperatorSpec::rectifier_max();
  for (int k = 0; k < 50; ++k) {
    const auto c = sample_circuit(deep_architecture(4, 2, 1 + k % 3, op), draw_seed(kSeed + 5, k));
    const auto grid = grid_tensor(c);
    const auto dec = generalized_generate(map_to_decomposition(c), op);
    worst = std::max(worst, relative_error(grid, dec));
    failures += !tensors_close(grid, dec, kEntrywiseTolerance);
  }
  std::ostringstream s;
  s << "50 (relu, max) circuits, worst relative error " << worst;
  return {failures == 0, s.str()};
}

Outcome rectifier_incompleteness() {
  const auto c = rectifier_construction(8, 2, OperatorSpec::rectifier_max(), kDefaultGridGuard, kRankTolerance);
  const auto shallow = grid_tensor(shallow_circuit(c.shallow, OperatorSpec::rectifier_max()));
  const auto deep = generalized_generate(max_pooling_deep_equivalent(c.shallow), OperatorSpec::rectifier_max());
  const bool match = tensors_close(shallow, deep, kEntrywiseTolerance);
  std::ostringstream s;
  s << "deep construction width " << c.deep_width << ", even-odd rank " << c.rank << ", shallow channels "
    << c.shallow.terms() << ", entrywise match " << (match ? "yes" : "no");
  return {c.rank <= 2 && c.shallow.terms() <= 2 && match && c.relative_error <= kEntrywiseTolerance, s.str()};
}

Outcome pooling_geometry() {
  const auto shape = HierarchicalShape::uniform(perfect_binary_tree(8), 2, 2);
  const TensorSampler sampler = [&](std::uint64_t seed) {
    return hierarchical_generate(sample_hierarchical_params(shape, seed));
  };
  const std::vector<Partition> parts{resolve_partition(CanonicalPartition::window_splitting(1), 8), halves(8)};
  const auto survey = survey_ranks(sampler, parts, 200, kSeed + 6, kRankTolerance);
  std::size_t both = 0, halves_over = 0;
  for (const auto& r : survey.ranks) {
    both += r[0] == 16 && r[1] <= 2;
    halves_over += r[1] > 2;
  }
  std::ostringstream s;
  s << both << "/200 draws with window-splitting rank 16 and halves rank <= 2 (halves above 2: "
    << halves_over << ")";
  return {both >= 198, s.str()};
}

Outcome overlap_efficiency() {
  const auto r = overlap_experiment(8, 2, 2, 2, halves(8), 20, settings(200, kSeed + 7));
  std::ostringstream s;
  s << "overlapping max rank " << r.overlapping.max_rank(0) << " vs ceiling " << r.ceiling
    << ", baseline max " << r.baseline.max_rank(0) << ", embedding error " << r.embedding_relative_error;
  return {r.ceiling == 2 && r.overlapping.max_rank(0) > 2 && r.exceeds &&
              r.embedding_relative_error <= kEntrywiseTolerance && r.embedding_checks == 20,
          s.str()};
}

Outcome min_cut_theorem() {
  std::size_t checks = 0, matched = 0, brute = 0, brute_ok = 0;
  std::ostringstream s;
  for (int n : {4, 8}) {
    for (int width : {1, 2, 3}) {
      const auto arch = deep_architecture(n, 2, width);
      const std::vector<Partition> parts{even_odd(n), halves(n),
                                         Partition(n, n == 4 ? std::vector<Mode>{1, 4}
                                                             : std::vector<Mode>{1, 2, 5})};
      const auto res = verify_min_cut_theorem(arch, parts, settings(200, kSeed + 8));
      const auto g = build_tensor_network(arch);
      for (const auto& c : res) {
        ++checks;
        const bool ok = c.matched && c.exceeding == 0 && BigInt(c.max_rank) == c.cut.value;
        matched += ok;
        if (!ok) s << "[N=" << n << " w=" << width << " " << c.partition.to_string() << " rank "
                   << c.max_rank << " cut " << c.cut.value << "] ";
      }
      for (const auto& p : all_partitions(n)) {
        ++brute;
        const auto fast = min_multiplicative_cut(g, p);
        const auto slow = oracle::brute_force_cut(g, p);
        brute_ok += fast.value == slow.value && fast.elements == slow.elements;
      }
    }
  }
  s << matched << "/" << checks << " circuit-partition pairs matched, solver = brute force on " << brute_ok
    << "/" << brute << " cuts";
  return {matched == checks && brute_ok == brute, s.str()};
}

Outcome mixture_efficiency() {
  const auto left = perfect_binary_tree(8);
  const auto right = dilation_tree(8, {1, 0, 2});
  const auto r = mixture_experiment(left, right, 2, 2, all_partitions(8), settings(200, kSeed + 9));
  const auto left_shape = HierarchicalShape::uniform(left, 2, 2);
  const auto right_shape = HierarchicalShape::uniform(right, 2, 2);
  bool reduces = r.degenerate_relative_error == 0.0;
  for (int d = 0; d < 20; ++d) {
    const auto p = sample_hierarchical_params(left_shape, draw_seed(kSeed + 10, d));
    reduces = reduces && mixed_generate(degenerate_mixture(p, right_shape)) == hierarchical_generate(p);
  }
  std::string example;
  for (const auto& row : r.rows) {
    if (row.exceeds_both) {
      std::ostringstream e;
      e << ", e.g. " << row.partition.to_string() << " mixed " << row.mixed_max << " vs " << row.left_max
        << "/" << row.right_max;
      example = e.str();
      break;
    }
  }
  std::ostringstream s;
  s << r.winning_partitions << "/" << r.rows.size() << " partitions where the mixture beats both trees"
    << example << ", degenerate mixture reduces entrywise: " << (reduces ? "yes" : "no");
  return {r.winning_partitions > 0 && reduces, s.str()};
}

Outcome determinism() {
  const std::vector<std::string> configs = {
      R"({"experiment": "depth_efficiency", "seed": 5, "draws": 20})",
      R"({"experiment": "rank_spectrum", "seed": 5, "draws": 20, "partitions": "all",
          "model": {"positions": 4, "grid_size": 3, "widths": 2}})",
      R"({"experiment": "separation_rank", "seed": 5, "model": {"positions": 8, "grid_size": 2, "widths": 2}})",
      R"({"experiment": "overlap", "seed": 5, "draws": 20})",
      R"({"experiment": "min_cut_verify", "seed": 5, "draws": 20,
          "model": {"positions": 8, "grid_size": 2, "widths": [3, 2, 1]}})",
      R"({"experiment": "width_advise", "seed": 5, "budget": 7, "model": {"positions": 8, "grid_size": 2},
          "partitions": ["even_odd", "contiguous_halves"]})",
      R"({"experiment": "mixture", "seed": 5, "draws": 20})",
      R"({"experiment": "grid_tensor_dump", "seed": 5, "model": {"positions": 4, "grid_size": 3, "widths": 2}})",
  };
  std::size_t identical = 0;
  std::string differing;
  for (const auto& text : configs) {
    const Json raw = Json::parse(text);
    auto once = [&] {
      const auto rep = cli::run_experiment(cli::resolve_config(raw, {}));
      std::string out = cli::render(rep, "json", Json::object());
      if (!rep.rows.empty()) out += cli::render(rep, "csv", Json::object());
      return out;
    };
    if (once() == once()) ++identical;
    else differing += raw.at("experiment").get<std::string>() + " ";
  }
  std::ostringstream s;
  s << identical << "/" << configs.size() << " experiment kinds byte-identical on rerun";
  if (!differing.empty()) s << " (differing: " << differing << ")";
  return {identical == configs.size(), s.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"cp_bound", cp_bound},
      {"depth_efficiency", depth_efficiency},
      {"circuit_decomposition_equivalence", circuit_equivalence},
      {"rectifier_equivalence", rectifier_equivalence},
      {"rectifier_incompleteness", rectifier_incompleteness},
      {"pooling_geometry", pooling_geometry},
      {"overlap_efficiency", overlap_efficiency},
      {"min_cut_theorem", min_cut_theorem},
      {"mixture_efficiency", mixture_efficiency},
      {"determinism", determinism},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
