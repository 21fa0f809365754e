#include "htcirc/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>
#include <unistd.h>

#include "htcirc/errors.hpp"

namespace htcirc::cli {

namespace fs = std::filesystem;

namespace {

struct Kind {
  std::string name;
  std::string description;
  int default_draws;
};

const std::vector<Kind>& kinds() {
  static const std::vector<Kind> k = {
      {"depth_efficiency",
       "random deep networks reach the maximal even-odd rank that shallow networks need "
       "exponentially many channels for",
       100},
      {"rank_spectrum", "matricization ranks of random circuits over a set of partitions", 200},
      {"separation_rank", "separation rank of one circuit under each partition", 1},
      {"overlap", "overlapping stride-1 windows beat the non-overlapping rank ceiling", 200},
      {"min_cut_verify", "maximal separation rank equals the multiplicative min-cut", 200},
      {"width_advise", "layer widths within a budget that maximize the targeted min-cuts", 0},
      {"mixture", "interleaved decompositions on two mode trees exceed both single trees", 200},
      {"grid_tensor_dump", "grid tensor of one circuit in the dense tensor format", 0},
  };
  return k;
}

const Kind& find_kind(const std::string& name) {
  for (const auto& k : kinds()) {
    if (k.name == name) return k;
  }
  throw InvalidArgument("field 'experiment' names unknown kind '" + name + "'");
}

const Json& require(const Json& j, const std::string& name) {
  if (!j.contains(name)) throw InvalidArgument("missing field '" + name + "'");
  return j.at(name);
}

template <typename T>
T read(const Json& j, const std::string& name) {
  try {
    return require(j, name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw InvalidArgument("field '" + name + "' has the wrong type");
  }
}

template <typename T>
T read_or(const Json& j, const std::string& name, T fallback) {
  return j.contains(name) ? read<T>(j, name) : fallback;
}

Json load_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument("malformed JSON in '" + path.string() + "': " + e.what());
  }
}

/// Model objects may be given inline or as a path to a JSON file.
Json load_model(const Json& j, const fs::path& base_dir) {
  if (j.is_string()) return load_json_file(base_dir / j.get<std::string>());
  if (!j.is_object()) throw InvalidArgument("field 'model' must be an object or a file path");
  return j;
}

bool is_circuit(const Json& model) { return model.contains("architecture"); }

Json resolve_partitions(const Json& raw, int positions, const std::optional<PoolingSchedule>& s,
                        const Json& fallback) {
  const Json& spec = raw.contains("partitions") ? raw.at("partitions") : fallback;
  Json out = Json::array();
  for (const auto& p : partitions_from_json(spec, positions, s)) out.push_back(to_json(p));
  return out;
}

std::vector<Partition> partitions_of(const Json& resolved) {
  std::vector<Partition> out;
  const auto n = read<std::size_t>(resolved, "positions");
  for (const auto& p : require(resolved, "partitions")) {
    out.emplace_back(n, p.at("left").get<std::vector<Mode>>(), p.at("right").get<std::vector<Mode>>());
  }
  return out;
}

RunSettings settings_of(const Json& r) {
  return {read<int>(r, "draws"), read<std::uint64_t>(r, "seed"), read<double>(r, "tolerance"),
          read<std::uint64_t>(r, "guard")};
}

std::string big(const BigInt& v) { return to_string(v); }

std::string json_number(double x) { return Json(x).dump(); }

Json int_list(const std::vector<int>& v) { return Json(v); }

CsvRow row(const Json& r, const std::string& partition, std::size_t draws, const std::string& max_rank,
           const std::string& bound, bool matched) {
  return {read<std::string>(r, "experiment"), partition, draws, max_rank, bound, matched,
          read<std::uint64_t>(r, "seed"), read<double>(r, "tolerance")};
}

Json survey_summaries(const SurveyResult& s) {
  Json out = Json::array();
  for (std::size_t k = 0; k < s.summaries.size(); ++k) {
    const auto& m = s.summaries[k];
    Json j;
    j["partition"] = to_json(m.partition);
    j["max_rank"] = m.max_rank;
    j["count_at_max"] = m.count_at_max;
    j["min_cut"] = m.bound ? Json(big(*m.bound)) : Json(nullptr);
    j["exceeding_draws"] = m.exceeding;
    std::vector<int> ranks;
    for (const auto& draw : s.survey.ranks) ranks.push_back(draw[k]);
    j["ranks"] = ranks;
    out.push_back(std::move(j));
  }
  return out;
}

// ---------------------------------------------------------------------------
// per-kind resolution and execution

void resolve_depth(const Json& raw, Json& r) {
  r["positions"] = read_or<int>(raw, "positions", 8);
  r["grid_size"] = read_or<int>(raw, "grid_size", 2);
  r["width"] = read_or<int>(raw, "width", 2);
  r["shallow_r0_max"] = read_or<int>(raw, "shallow_r0_max", 4);
  r["operator"] = to_json(raw.contains("operator") ? operator_from_json(raw.at("operator"))
                                                   : OperatorSpec::arithmetic());
}

Report run_depth(const Json& r) {
  const auto res = depth_efficiency_experiment(
      read<int>(r, "positions"), read<int>(r, "grid_size"), read<int>(r, "width"),
      read<int>(r, "shallow_r0_max"), operator_from_json(r.at("operator")), settings_of(r));
  Json out;
  out["partition"] = to_json(res.partition);
  out["target_rank"] = res.target_rank;
  out["achieved"] = res.achieved;
  out["fraction_at_target"] = res.fraction();
  out["implied_shallow_r0"] = res.implied_shallow_r0;
  out["shallow_max_rank"] = int_list(res.shallow_max_rank);
  out["ranks"] = int_list(res.ranks);
  if (res.construction) {
    const auto& c = *res.construction;
    Json cj;
    cj["shallow_channels"] = c.shallow.terms();
    cj["shallow_vectors"] = c.shallow.vectors;
    cj["shallow_weights"] = c.shallow.weights;
    cj["deep_width"] = c.deep_width;
    cj["even_odd_rank"] = c.rank;
    cj["rank_bound"] = c.rank_bound;
    cj["relative_error"] = c.relative_error;
    out["low_rank_construction"] = std::move(cj);
  } else {
    out["low_rank_construction"] = nullptr;
  }
  Report rep;
  rep.payload["results"] = std::move(out);
  const int max_rank = res.implied_shallow_r0;
  rep.rows.push_back(row(r, res.partition.to_string(), res.ranks.size(), std::to_string(max_rank),
                         std::to_string(res.target_rank), res.fraction() >= 0.99));
  std::ostringstream s;
  s << "fraction_at_target=" << json_number(res.fraction()) << " target=" << res.target_rank;
  rep.summary = s.str();
  return rep;
}

void resolve_architecture_model(const Json& raw, Json& r, const fs::path& base, bool free_widths) {
  Json model = load_model(require(raw, "model"), base);
  if (is_circuit(model)) model = model.at("architecture");
  if (free_widths && !model.contains("widths")) model["widths"] = 1;
  const Architecture a = architecture_from_json(model);
  r["positions"] = a.positions;
  r["model"] = to_json(a);
}

Architecture architecture_of(const Json& r) { return architecture_from_json(r.at("model")); }

void resolve_spectrum(const Json& raw, Json& r, const fs::path& base) {
  resolve_architecture_model(raw, r, base, false);
  const auto a = architecture_of(r);
  r["partitions"] = resolve_partitions(raw, a.positions, a.schedule,
                                       Json::array({"even_odd", "contiguous_halves"}));
}

Report run_spectrum(const Json& r) {
  const auto res = architecture_survey(architecture_of(r), partitions_of(r), settings_of(r));
  Report rep;
  rep.payload["results"]["partitions"] = survey_summaries(res);
  std::ostringstream s;
  s << "max_ranks=[";
  for (std::size_t k = 0; k < res.summaries.size(); ++k) {
    const auto& m = res.summaries[k];
    rep.rows.push_back(row(r, m.partition.to_string(), res.survey.draws(), std::to_string(m.max_rank),
                           m.bound ? big(*m.bound) : "", m.bound && BigInt(m.max_rank) == *m.bound));
    s << (k ? "," : "") << m.max_rank;
  }
  s << "]";
  rep.summary = s.str();
  return rep;
}

void resolve_separation(const Json& raw, Json& r, const fs::path& base) {
  const Json model = load_model(require(raw, "model"), base);
  if (is_circuit(model)) {
    const auto c = circuit_from_json(model);
    r["positions"] = c.arch.positions;
    r["model"] = to_json(c);
  } else {
    const auto a = architecture_from_json(model);
    r["positions"] = a.positions;
    r["model"] = to_json(a);
  }
  const auto a = architecture_from_json(is_circuit(r["model"]) ? r["model"]["architecture"] : r["model"]);
  r["partitions"] = resolve_partitions(raw, a.positions, a.schedule,
                                       Json::array({"even_odd", "contiguous_halves"}));
}

CircuitSpec circuit_of(const Json& r) {
  const Json& model = r.at("model");
  if (is_circuit(model)) return circuit_from_json(model);
  return sample_circuit(architecture_from_json(model), read<std::uint64_t>(r, "seed"));
}

Report run_separation(const Json& r) {
  const auto c = circuit_of(r);
  const auto tensor = grid_tensor(c, read<std::uint64_t>(r, "guard"));
  std::optional<TensorNetworkGraph> net;
  if (!c.arch.schedule.has_overlaps()) net = build_tensor_network(c.arch);
  Report rep;
  Json list = Json::array();
  std::ostringstream s;
  s << "ranks=[";
  const auto parts = partitions_of(r);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const int rank = numerical_rank(matricize(tensor, parts[k]), read<double>(r, "tolerance"));
    std::optional<BigInt> bound;
    if (net) bound = min_multiplicative_cut(*net, parts[k]).value;
    Json j;
    j["partition"] = to_json(parts[k]);
    j["rank"] = rank;
    j["min_cut"] = bound ? Json(big(*bound)) : Json(nullptr);
    list.push_back(std::move(j));
    rep.rows.push_back(row(r, parts[k].to_string(), 1, std::to_string(rank), bound ? big(*bound) : "",
                           !bound || BigInt(rank) <= *bound));
    s << (k ? "," : "") << rank;
  }
  s << "]";
  rep.payload["results"]["circuit"] = is_circuit(r.at("model")) ? "explicit" : "sampled";
  rep.payload["results"]["partitions"] = std::move(list);
  rep.summary = s.str();
  return rep;
}

void resolve_overlap(const Json& raw, Json& r) {
  r["positions"] = read_or<int>(raw, "positions", 8);
  r["grid_size"] = read_or<int>(raw, "grid_size", 2);
  r["window"] = read_or<int>(raw, "window", 2);
  r["width"] = read_or<int>(raw, "width", 2);
  r["embedding_checks"] = read_or<int>(raw, "embedding_checks", 20);
  const int n = r["positions"].get<int>();
  const Json spec = raw.contains("partition") ? raw.at("partition") : Json("contiguous_halves");
  r["partitions"] = Json::array({to_json(partition_from_json(spec, n, PoolingSchedule::baseline(n)))});
}

Report run_overlap(const Json& r) {
  const auto parts = partitions_of(r);
  const auto res = overlap_experiment(read<int>(r, "positions"), read<int>(r, "grid_size"),
                                      read<int>(r, "window"), read<int>(r, "width"), parts.front(),
                                      read<int>(r, "embedding_checks"), settings_of(r));
  Json out;
  out["partition"] = to_json(res.partition);
  out["overlapping_max_rank"] = res.overlapping.max_rank(0);
  out["baseline_max_rank"] = res.baseline.max_rank(0);
  out["baseline_min_cut"] = big(res.ceiling);
  out["exceeds_ceiling"] = res.exceeds;
  out["embedding_checks"] = res.embedding_checks;
  out["embedding_relative_error"] = res.embedding_relative_error;
  std::vector<int> o, b;
  for (const auto& d : res.overlapping.ranks) o.push_back(d[0]);
  for (const auto& d : res.baseline.ranks) b.push_back(d[0]);
  out["overlapping_ranks"] = o;
  out["baseline_ranks"] = b;
  Report rep;
  rep.payload["results"] = std::move(out);
  rep.rows.push_back(row(r, res.partition.to_string(), res.overlapping.draws(),
                         std::to_string(res.overlapping.max_rank(0)), big(res.ceiling), res.exceeds));
  rep.summary = "overlapping_max_rank=" + std::to_string(res.overlapping.max_rank(0)) +
                " ceiling=" + big(res.ceiling);
  return rep;
}

Json network_json(const TensorNetworkGraph& g) {
  Json j;
  Json edges = Json::array();
  for (const auto& e : g.edges) edges.push_back(Json::array({e.a, e.b, e.weight}));
  j["nodes"] = g.num_nodes;
  j["edges"] = std::move(edges);
  j["terminals"] = g.terminals;
  j["node_weights"] = g.node_weights;
  return j;
}

void resolve_min_cut(const Json& raw, Json& r, const fs::path& base) {
  resolve_spectrum(raw, r, base);
}

Report run_min_cut(const Json& r) {
  const auto arch = architecture_of(r);
  const auto checks = verify_min_cut_theorem(arch, partitions_of(r), settings_of(r));
  Report rep;
  rep.payload["results"]["network"] = network_json(build_tensor_network(arch));
  Json list = Json::array();
  std::size_t matched = 0;
  for (const auto& c : checks) {
    Json j;
    j["partition"] = to_json(c.partition);
    j["min_cut"] = big(c.cut.value);
    j["cut_elements"] = c.cut.elements;
    j["max_rank"] = c.max_rank;
    j["exceeding_draws"] = c.exceeding;
    j["matched"] = c.matched;
    list.push_back(std::move(j));
    matched += c.matched && c.exceeding == 0;
    rep.rows.push_back(row(r, c.partition.to_string(), static_cast<std::size_t>(read<int>(r, "draws")),
                           std::to_string(c.max_rank), big(c.cut.value),
                           c.matched && c.exceeding == 0));
  }
  rep.payload["results"]["partitions"] = std::move(list);
  rep.summary = "matched=" + std::to_string(matched) + "/" + std::to_string(checks.size());
  return rep;
}

void resolve_width(const Json& raw, Json& r, const fs::path& base) {
  resolve_architecture_model(raw, r, base, true);
  const auto a = architecture_of(r);
  if (!raw.contains("partitions")) throw InvalidArgument("missing field 'partitions'");
  r["partitions"] = resolve_partitions(raw, a.positions, a.schedule, Json());
  r["budget"] = read<int>(raw, "budget");
}

Report run_width(const Json& r) {
  const auto parts = partitions_of(r);
  const auto advice = width_advisor(architecture_of(r), parts, read<int>(r, "budget"));
  Report rep;
  Json out;
  out["widths"] = advice.widths;
  out["objective"] = big(advice.objective);
  Json cuts = Json::array();
  for (std::size_t k = 0; k < parts.size(); ++k) {
    Json j;
    j["partition"] = to_json(parts[k]);
    j["min_cut"] = big(advice.target_cuts[k]);
    cuts.push_back(std::move(j));
    rep.rows.push_back(row(r, parts[k].to_string(), 0, "", big(advice.target_cuts[k]),
                           advice.target_cuts[k] > 1));
  }
  out["targets"] = std::move(cuts);
  out["assignments_checked"] = advice.assignments_checked;
  rep.payload["results"] = std::move(out);
  std::ostringstream s;
  s << "widths=" << Json(advice.widths).dump() << " objective=" << big(advice.objective);
  rep.summary = s.str();
  return rep;
}

void resolve_mixture(const Json& raw, Json& r) {
  const int n = read_or<int>(raw, "positions", 8);
  r["positions"] = n;
  r["grid_size"] = read_or<int>(raw, "grid_size", 2);
  r["width"] = read_or<int>(raw, "width", 2);
  const Json left = raw.contains("left_tree") ? raw.at("left_tree") : Json("baseline");
  Json right;
  if (raw.contains("right_tree")) {
    right = raw.at("right_tree");
  } else {
    auto order = baseline_dilation_order(n);
    if (order.size() >= 2) std::swap(order[0], order[1]);
    right["dilation"] = order;
  }
  r["left_tree"] = to_json(tree_from_json(left, n));
  r["right_tree"] = to_json(tree_from_json(right, n));
  r["partitions"] = resolve_partitions(raw, n, std::nullopt, Json("all"));
}

Report run_mixture(const Json& r) {
  const int n = read<int>(r, "positions");
  const auto res = mixture_experiment(tree_from_json(r.at("left_tree"), n),
                                      tree_from_json(r.at("right_tree"), n), read<int>(r, "grid_size"),
                                      read<int>(r, "width"), partitions_of(r), settings_of(r));
  Json out;
  out["exchange_nodes"] = res.exchange;
  out["winning_partitions"] = res.winning_partitions;
  out["width_inflation_is_proxy"] = true;
  out["degenerate_relative_error"] = res.degenerate_relative_error;
  Json rows = Json::array();
  Report rep;
  for (const auto& m : res.rows) {
    Json j;
    j["partition"] = to_json(m.partition);
    j["left_max_rank"] = m.left_max;
    j["right_max_rank"] = m.right_max;
    j["mixed_max_rank"] = m.mixed_max;
    j["exceeds_both"] = m.exceeds_both;
    j["left_width_needed"] = m.left_width_needed;
    j["right_width_needed"] = m.right_width_needed;
    rows.push_back(std::move(j));
    rep.rows.push_back(row(r, m.partition.to_string(), static_cast<std::size_t>(read<int>(r, "draws")),
                           std::to_string(m.mixed_max), std::to_string(std::max(m.left_max, m.right_max)),
                           m.exceeds_both));
  }
  out["partitions"] = std::move(rows);
  rep.payload["results"] = std::move(out);
  rep.summary = "winning_partitions=" + std::to_string(res.winning_partitions) + "/" +
                std::to_string(res.rows.size());
  return rep;
}

void resolve_dump(const Json& raw, Json& r, const fs::path& base) {
  const Json model = load_model(require(raw, "model"), base);
  if (is_circuit(model)) {
    const auto c = circuit_from_json(model);
    r["positions"] = c.arch.positions;
    r["model"] = to_json(c);
  } else {
    const auto a = architecture_from_json(model);
    r["positions"] = a.positions;
    r["model"] = to_json(a);
  }
}

Report run_dump(const Json& r) {
  const auto c = circuit_of(r);
  const auto t = grid_tensor(c, read<std::uint64_t>(r, "guard"));
  Report rep;
  rep.payload["results"]["tensor"] = to_json(t);
  rep.summary = "entries=" + std::to_string(t.size());
  return rep;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& k : kinds()) n.push_back(k.name);
    return n;
  }();
  return names;
}

std::string list_experiments() {
  std::ostringstream out;
  for (const auto& k : kinds()) out << k.name << "  " << k.description << "\n";
  return out.str();
}

Json resolve_config(const Json& raw, const Overrides& o, const fs::path& base_dir) {
  if (!raw.is_object()) throw InvalidArgument("config must be a JSON object");
  const auto& kind = find_kind(read<std::string>(raw, "experiment"));
  Json r;
  r["experiment"] = kind.name;
  if (o.seed) {
    r["seed"] = *o.seed;
  } else if (raw.contains("seed")) {
    r["seed"] = read<std::uint64_t>(raw, "seed");
  } else {
    throw InvalidArgument("missing field 'seed' (every run must be seeded)");
  }
  r["draws"] = kind.default_draws > 0 ? read_or<int>(raw, "draws", kind.default_draws) : 0;
  r["tolerance"] = o.tolerance ? *o.tolerance : read_or<double>(raw, "tolerance", kExperimentRankTolerance);
  r["guard"] = o.guard ? *o.guard : read_or<std::uint64_t>(raw, "guard", kDefaultGridGuard);
  if (kind.default_draws > 0 && r["draws"].get<int>() < 1) {
    throw InvalidArgument("field 'draws' must be >= 1");
  }
  if (!(r["tolerance"].get<double>() > 0.0)) throw InvalidArgument("field 'tolerance' must be > 0");

  const std::string& name = kind.name;
  if (name == "depth_efficiency") resolve_depth(raw, r);
  else if (name == "rank_spectrum") resolve_spectrum(raw, r, base_dir);
  else if (name == "separation_rank") resolve_separation(raw, r, base_dir);
  else if (name == "overlap") resolve_overlap(raw, r);
  else if (name == "min_cut_verify") resolve_min_cut(raw, r, base_dir);
  else if (name == "width_advise") resolve_width(raw, r, base_dir);
  else if (name == "mixture") resolve_mixture(raw, r);
  else resolve_dump(raw, r, base_dir);
  return r;
}

Report run_experiment(const Json& resolved) {
  static const std::map<std::string, std::function<Report(const Json&)>> runners = {
      {"depth_efficiency", run_depth}, {"rank_spectrum", run_spectrum},
      {"separation_rank", run_separation}, {"overlap", run_overlap},
      {"min_cut_verify", run_min_cut}, {"width_advise", run_width},
      {"mixture", run_mixture}, {"grid_tensor_dump", run_dump},
  };
  const auto name = read<std::string>(resolved, "experiment");
  Report rep = runners.at(find_kind(name).name)(resolved);
  Json payload;
  payload["experiment"] = name;
  payload["config"] = resolved;
  payload["results"] = std::move(rep.payload["results"]);
  rep.payload = std::move(payload);
  return rep;
}

std::string render_csv(const std::vector<CsvRow>& rows) {
  std::ostringstream out;
  out << "experiment,partition,draw_count,max_rank,theoretical_bound,matched,seed,tolerance\n";
  for (const auto& r : rows) {
    out << csv_field(r.experiment) << ',' << csv_field(r.partition) << ',' << r.draw_count << ','
        << r.max_rank << ',' << r.theoretical_bound << ',' << (r.matched ? "true" : "false") << ','
        << r.seed << ',' << json_number(r.tolerance) << '\n';
  }
  return out.str();
}

std::string render(const Report& report, const std::string& format, const Json& metadata) {
  if (format == "csv") {
    if (report.rows.empty()) {
      throw InvalidArgument("experiment '" + report.payload.at("experiment").get<std::string>() +
                            "' has no partition rows; use --format json");
    }
    return render_csv(report.rows);
  }
  if (format != "json") throw InvalidArgument("field 'format' must be json or csv");
  Json doc = report.payload;
  doc["metadata"] = metadata;
  return doc.dump(2) + "\n";
}

void write_atomically(const fs::path& path, const std::string& contents) {
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  fs::create_directories(dir);
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) throw std::runtime_error("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot move report into '" + path.string() + "': " + ec.message());
  }
}

fs::path output_path(const Json& raw, const Json& resolved, const Overrides& o,
                     const std::string& format) {
  if (o.out) return *o.out;
  if (raw.contains("output") && raw.at("output").contains("path")) {
    return read<std::string>(raw.at("output"), "path");
  }
  fs::path dir = ".";
  if (const char* env = std::getenv(kOutDirVariable); env && *env) dir = env;
  return dir / (resolved.at("experiment").get<std::string>() + "-" +
                std::to_string(resolved.at("seed").get<std::uint64_t>()) + "." + format);
}

namespace {

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

int run(const fs::path& config_path, const Overrides& overrides, std::ostream& out,
        std::ostream& err) {
  try {
    const Json raw = load_json_file(config_path);
    std::string format = "json";
    if (overrides.format) {
      format = *overrides.format;
    } else if (raw.is_object() && raw.contains("output") && raw.at("output").contains("format")) {
      format = read<std::string>(raw.at("output"), "format");
    }
    if (format != "json" && format != "csv") {
      throw InvalidArgument("field 'format' must be json or csv, got '" + format + "'");
    }
    const Json resolved = resolve_config(raw, overrides, config_path.parent_path());
    const Report report = run_experiment(resolved);
    const fs::path path = output_path(raw, resolved, overrides, format);
    Json metadata;
    metadata["timestamp"] = utc_timestamp();
    metadata["format"] = format;
    write_atomically(path, render(report, format, metadata));
    out << resolved.at("experiment").get<std::string>() << " " << report.summary << " -> "
        << path.string() << "\n";
    return kOk;
  } catch (const GuardError& e) {
    err << "guard violation: " << e.what() << "\n";
    return kGuardError;
  } catch (const InvalidArgument& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InvariantError& e) {
    err << "invariant failure: " << e.what() << "\n";
    return kInvariantError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace htcirc::cli
