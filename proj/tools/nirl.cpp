// nirl: story validation, play, expert synthesis, training, rollout,
// evaluation, the experiment grid, plots and the play service.

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "httplib.h"
#include "narrative/errors.hpp"
#include "narrative/experiment.hpp"
#include "narrative/reachability.hpp"
#include "narrative/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace narrative;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

// Input problems: bad files, ids, flags.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string default_traces_dir() {
  if (const char* d = std::getenv("NA_DATA_DIR"); d && *d) return (fs::path(d) / "traces").string();
  return "traces";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
}

json read_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

WorldSpec load_story(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("story not found: " + path);
  return load_world_file(path);
}

std::vector<Trace> load_traces(const WorldSpec& world, const std::string& dir) {
  if (!fs::is_directory(dir)) throw UsageError("trace directory not found: " + dir);
  return TraceStore(dir).load_all(world);
}

json record_to_json(const TrainingRecord& r) {
  return {{"horizon", r.config.horizon},
          {"beta", r.config.beta},
          {"max_iterations", r.config.max_iterations},
          {"step_size", r.config.step_size},
          {"backtracking", r.config.backtracking},
          {"log_likelihood", r.log_likelihood},
          {"step_size_used", r.step_size_used}};
}

TrainingRecord record_from_json(const json& j) {
  TrainingRecord r;
  r.config.horizon = j.at("horizon").get<int>();
  r.config.beta = j.at("beta").get<double>();
  r.log_likelihood = j.at("log_likelihood").get<std::vector<double>>();
  r.step_size_used = j.value("step_size_used", std::vector<double>{});
  return r;
}

std::string format_beta(double b) {
  std::ostringstream s;
  s << b;
  return s.str();
}

std::string safe_name(std::string s) {
  for (auto& c : s)
    if (c == ':' || c == '/') c = '_';
  return s;
}

// One manifest per run, next to the main output.
struct ManifestWriter {
  RunManifest m;
  json config;

  ManifestWriter(std::string command, json cfg, std::uint64_t seed) : config(std::move(cfg)) {
    m.command = std::move(command);
    m.seed = seed;
    m.started_at = utc_timestamp();
  }
  void write(const fs::path& where) {
    m.config_digest = config_digest(config);
    m.finished_at = utc_timestamp();
    json j = manifest_to_json(m);
    j["config"] = config;
    write_file(where, j.dump(2) + "\n");
  }
};

fs::path manifest_path_for(const std::string& output) {
  fs::path p(output);
  if (fs::is_directory(p)) return p / "manifest.json";
  return fs::path(output + ".manifest.json");
}

struct Options {
  std::string story = sample_story_path();
  std::string traces = default_traces_dir();
  std::string group;
  std::string output;
  std::string weights;
  std::string policy;
  std::string records;
  std::string ending;
  std::string mode = "greedy";
  std::string bind = "127.0.0.1:8080";
  std::string client_dir;
  std::vector<std::string> groups;
  std::vector<int> horizons{1, 2, 3, 4};
  std::vector<double> betas{0.1, 0.5, 1.0};
  int horizon = 4;
  double beta = 0.1;
  int iterations = 10;
  int cap = 100;
  int n = 5;
  int expert_horizon = 4;
  double expert_beta = 5.0;
  unsigned jobs = 1;
  std::uint64_t seed = 1;
  int state_cap = 200;
};

int cmd_validate(const Options& o) {
  const auto world = load_story(o.story);
  ReachabilityOptions ro;
  ro.cap = o.state_cap;
  const auto rep = validate_reachability(world, ro);
  const json j = reachability_to_json(world, rep);
  std::cout << "story: " << world.title << " (" << world.fingerprint() << ")\n";
  for (const auto& e : rep.endings) {
    std::cout << "  ending " << e.id << ": ";
    if (e.reachable)
      std::cout << "reachable in " << e.depth << " actions\n";
    else
      std::cout << "NOT reachable within " << rep.cap << " actions\n";
  }
  for (const auto& id : rep.unreachable) std::cout << "  plot point " << id << " unreachable\n";
  std::cout << "  states explored: " << rep.states_explored << (rep.truncated ? " (truncated)" : "") << '\n';
  if (!o.output.empty()) {
    write_file(o.output, j.dump(2) + "\n");
    ManifestWriter mw("validate", {{"story", world.fingerprint()}, {"cap", o.state_cap}}, 0);
    mw.m.inputs = {o.story};
    mw.m.outputs = {o.output};
    mw.write(manifest_path_for(o.output));
  }
  for (const auto& e : rep.endings)
    if (!e.reachable) return kExitValidation;
  return 0;
}

int cmd_play(const Options& o) {
  const auto world = load_story(o.story);
  GameState state = initial_state(world);
  Trace t;
  t.trace_id = "play-" + utc_timestamp();
  for (auto& c : t.trace_id)
    if (c == ':') c = '-';
  t.player_id = "terminal";
  t.source = TraceSource::Human;
  t.story_fingerprint = world.fingerprint();
  const auto start = std::chrono::steady_clock::now();
  const auto& loc = world.locations[state.current_location];
  std::cout << world.title << "\n\n" << (loc.text.empty() ? loc.name : loc.text) << '\n';
  std::string line;
  while (!is_terminal(world, state)) {
    const auto acts = applicable_actions(world, state);
    std::cout << '\n';
    for (std::size_t i = 0; i < acts.size(); ++i) std::cout << "  " << i + 1 << ". " << describe(world, acts[i]) << '\n';
    std::cout << "> " << std::flush;
    if (!std::getline(std::cin, line)) break;
    if (line == "q" || line == "quit") break;
    std::size_t choice = 0;
    try {
      choice = std::stoul(line);
    } catch (const std::exception&) {
      std::cout << "enter a number, or q to stop\n";
      continue;
    }
    if (choice < 1 || choice > acts.size()) {
      std::cout << "no such choice\n";
      continue;
    }
    auto out = apply_action(world, state, acts[choice - 1]);
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
    t.actions.push_back({acts[choice - 1], ms.count()});
    std::cout << out.narration << '\n';
    state = std::move(out.next_state);
  }
  if (int e = ending_reached(world, state); e >= 0) {
    t.end_reached = world.plot_points[e].id;
    std::cout << "\n*** " << world.plot_points[e].text << " ***\n";
  }
  if (!o.output.empty()) {
    write_file(o.output, trace_to_json(world, t).dump(2) + "\n");
    std::cout << "trace written to " << o.output << '\n';
  } else {
    const auto path = TraceStore(o.traces).save(world, t);
    std::cout << "trace written to " << path.string() << '\n';
  }
  return 0;
}

int cmd_synthesize(const Options& o) {
  const auto world = load_story(o.story);
  const FeatureMap fm(world);
  std::vector<Trace> traces;
  json cfg = {{"story", world.fingerprint()}, {"n", o.n}, {"beta", o.expert_beta},
              {"horizon", o.expert_horizon}, {"cap", o.cap}};
  std::vector<std::string> endings;
  if (!o.ending.empty()) {
    endings.push_back(o.ending);
  } else {
    for (int e : world.endings()) endings.push_back(world.plot_points[e].id);
  }
  for (const auto& ending : endings) {
    const int p = world.plot_index(ending);
    if (p < 0 || !world.plot_points[p].is_ending) throw UsageError("unknown ending: " + ending);
    ExpertSpec spec{ending, o.n, o.expert_beta, o.expert_horizon, o.cap, o.seed + static_cast<std::uint64_t>(p)};
    auto batch = synthesize_ending_group(world, fm, spec);
    std::cout << ending << ": " << batch.traces.size() << " traces from " << batch.candidates << " rollouts\n";
    for (auto& t : batch.traces) traces.push_back(std::move(t));
  }
  cfg["endings"] = endings;
  TraceStore store(o.output.empty() ? o.traces : o.output);
  ManifestWriter mw("synthesize", cfg, o.seed);
  for (const auto& t : traces) mw.m.outputs.push_back(store.save(world, t).string());
  mw.m.inputs = {o.story};
  mw.write(store.root() / "synthesize.manifest.json");
  return 0;
}

LearnerConfig learner_config(const Options& o) {
  LearnerConfig cfg;
  cfg.horizon = o.horizon;
  cfg.beta = o.beta;
  cfg.max_iterations = o.iterations;
  cfg.seed = o.seed;
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

int cmd_train(const Options& o) {
  if (o.group.empty()) throw UsageError("--group is required");
  const auto world = load_story(o.story);
  const auto traces = load_traces(world, o.traces);
  const auto group = select_group(world, traces, o.group);
  if (group.members.empty()) throw UsageError("group " + o.group + " has no traces");
  const FeatureMap fm(world);
  const auto cfg = learner_config(o);
  const auto result = train(world, fm, to_demonstrations(world, group), cfg);
  for (std::size_t i = 0; i < result.record.log_likelihood.size(); ++i)
    std::cout << "iteration " << i << ": log-likelihood " << result.record.log_likelihood[i] << '\n';
  json out = {{"group", o.group},
              {"weights", weights_to_json(world, result.model)},
              {"record", record_to_json(result.record)}};
  const std::string path = o.output.empty() ? "weights.json" : o.output;
  write_file(path, out.dump(2) + "\n");
  ManifestWriter mw("train",
                    {{"story", world.fingerprint()}, {"group", o.group}, {"horizon", cfg.horizon}, {"beta", cfg.beta},
                     {"iterations", cfg.max_iterations}, {"members", group.members.size()}},
                    o.seed);
  mw.m.inputs = {o.story, o.traces};
  mw.m.outputs = {path};
  mw.write(manifest_path_for(path));
  return 0;
}

RewardModel load_weights(const WorldSpec& world, const std::string& path) {
  json j = read_json(path);
  if (j.contains("weights") && j["weights"].is_object() && j["weights"].contains("schema_version")) j = j["weights"];
  try {
    return weights_from_json(world, j);
  } catch (const std::invalid_argument& e) {
    throw UsageError(path + ": " + e.what());
  }
}

PolicyMode parse_mode(const std::string& m) {
  if (m == "greedy") return PolicyMode::Greedy;
  if (m == "sampled") return PolicyMode::Sampled;
  throw UsageError("mode must be greedy or sampled");
}

int cmd_rollout(const Options& o) {
  if (o.weights.empty()) throw UsageError("--weights is required");
  const auto world = load_story(o.story);
  TrainedPolicy p{load_weights(world, o.weights), o.horizon, o.beta, parse_mode(o.mode), o.seed};
  if (p.horizon < 1 || o.cap < 1) throw UsageError("horizon and cap must be >= 1");
  const auto g = rollout(p, world, o.cap);
  std::cout << g.actions.size() << " actions; plot points:";
  for (int pp : g.plot_points_discovered) std::cout << ' ' << world.plot_points[pp].id;
  std::cout << "\nend reached: " << (g.end_reached ? world.plot_points[*g.end_reached].id : "none") << '\n';
  const std::string path = o.output.empty() ? "policy-trace.json" : o.output;
  auto t = trace_from_generated(world, g, fs::path(path).stem().string());
  write_file(path, trace_to_json(world, t).dump(2) + "\n");
  ManifestWriter mw("rollout",
                    {{"story", world.fingerprint()}, {"horizon", p.horizon}, {"beta", p.beta}, {"mode", o.mode},
                     {"cap", o.cap}, {"weights", fnv1a_hex(read_file(o.weights))}},
                    o.seed);
  mw.m.inputs = {o.story, o.weights};
  mw.m.outputs = {path};
  mw.write(manifest_path_for(path));
  return 0;
}

int cmd_evaluate(const Options& o) {
  if (o.policy.empty() || o.group.empty()) throw UsageError("--policy and --group are required");
  const auto world = load_story(o.story);
  const auto traces = load_traces(world, o.traces);
  const auto group = select_group(world, traces, o.group);
  const auto policy_trace = trace_from_json(world, read_json(o.policy));
  const auto r = replay(world, policy_trace.action_list());
  GeneratedTrace g;
  g.actions = policy_trace.action_list();
  for (const auto& s : r.steps)
    for (int p : s.outcome.newly_visited_plot_points) g.plot_points_discovered.push_back(p);
  const auto report = evaluate_group(world, g, policy_trace.trace_id, group);
  const auto csv = group_reports_csv({report});
  std::cout << csv;
  if (!o.output.empty()) {
    write_file(o.output, csv);
    ManifestWriter mw("evaluate", {{"story", world.fingerprint()}, {"group", o.group},
                                   {"policy", fnv1a_hex(read_file(o.policy))}},
                      0);
    mw.m.inputs = {o.story, o.traces, o.policy};
    mw.m.outputs = {o.output};
    mw.write(manifest_path_for(o.output));
  }
  return 0;
}

void emit_convergence(const fs::path& dir, const std::map<GridKey, TrainingRecord>& records,
                      std::vector<std::string>& outputs) {
  const auto tables = export_convergence(records);
  for (const auto& t : tables) {
    const auto base = "convergence_" + safe_name(t.group) + "_beta" + format_beta(t.beta);
    write_file(dir / (base + ".csv"), convergence_csv(t));
    write_file(dir / (base + ".svg"), convergence_svg(t));
    outputs.push_back((dir / (base + ".csv")).string());
    outputs.push_back((dir / (base + ".svg")).string());
  }
  const auto report = horizon_ordering_report(tables);
  write_file(dir / "horizon_ordering.txt", report);
  outputs.push_back((dir / "horizon_ordering.txt").string());
  std::cout << report;
}

int cmd_grid(const Options& o) {
  const auto world = load_story(o.story);
  const auto traces = load_traces(world, o.traces);
  std::map<std::string, std::vector<Demonstration>> groups;
  std::map<std::string, TraceGroup> members;
  if (o.groups.empty()) {
    for (auto& g : group_by_end(world, traces))
      if (!g.members.empty()) members.emplace(g.group_id, std::move(g));
  } else {
    for (const auto& id : o.groups) {
      auto g = select_group(world, traces, id);
      if (g.members.empty()) throw UsageError("group " + id + " has no traces");
      members.emplace(id, std::move(g));
    }
  }
  if (members.empty()) throw UsageError("no non-empty groups in " + o.traces);
  for (const auto& [id, g] : members) groups.emplace(id, to_demonstrations(world, g));

  const FeatureMap fm(world);
  GridOptions go;
  go.base.max_iterations = o.iterations;
  go.base.seed = o.seed;
  go.jobs = o.jobs;
  std::mutex print;
  go.on_cell_done = [&](const GridKey& k, const GridCell& c) {
    std::lock_guard lock(print);
    std::cerr << k.group << " h=" << k.horizon << " beta=" << k.beta << ": "
              << (c.result ? "ok" : "failed: " + c.error) << '\n';
  };
  const auto cells = run_grid(world, fm, groups, o.horizons, o.betas, go);

  const fs::path dir = o.output.empty() ? "grid-output" : o.output;
  fs::create_directories(dir);
  std::vector<std::string> outputs;
  json records = json::array();
  std::map<GridKey, TrainingRecord> recs;
  std::vector<GroupReport> reports;
  int failures = 0;
  for (const auto& [k, c] : cells) {
    json cell = {{"group", k.group}, {"horizon", k.horizon}, {"beta", k.beta}};
    if (!c.result) {
      cell["error"] = c.error;
      ++failures;
      records.push_back(cell);
      continue;
    }
    cell["record"] = record_to_json(c.result->record);
    cell["weights"] = weights_to_json(world, c.result->model);
    TrainedPolicy p{c.result->model, k.horizon, k.beta, PolicyMode::Greedy, o.seed};
    const auto g = rollout(p, world, o.cap);
    auto report = evaluate_group(world, g, "policy", members.at(k.group), k.horizon, k.beta);
    report.group_id = k.group + " h=" + std::to_string(k.horizon) + " beta=" + format_beta(k.beta);
    cell["rollout"] = trace_to_json(world, trace_from_generated(world, g, "policy-" + safe_name(report.group_id)));
    reports.push_back(report);
    recs.emplace(k, c.result->record);
    records.push_back(cell);
  }
  write_file(dir / "records.json", records.dump(2) + "\n");
  write_file(dir / "similarity.csv", group_reports_csv(reports));
  outputs.push_back((dir / "records.json").string());
  outputs.push_back((dir / "similarity.csv").string());
  if (!recs.empty()) emit_convergence(dir, recs, outputs);
  std::cout << group_reports_csv(reports);

  json cfg = {{"story", world.fingerprint()}, {"horizons", o.horizons}, {"betas", o.betas},
              {"iterations", o.iterations}, {"cap", o.cap}};
  json gids = json::object();
  for (const auto& [id, g] : members) {
    std::vector<std::string> ids;
    for (const auto& t : g.members) ids.push_back(t.trace_id);
    gids[id] = ids;
  }
  cfg["groups"] = gids;
  ManifestWriter mw("grid", cfg, o.seed);
  mw.m.inputs = {o.story, o.traces};
  mw.m.outputs = outputs;
  mw.write(dir / "manifest.json");
  std::cout << cells.size() << " cells, " << failures << " failed\n";
  return failures ? kExitRuntime : 0;
}

int cmd_plot(const Options& o) {
  if (o.output.empty()) throw UsageError("--output directory is required");
  const fs::path records_path = o.records;
  if (!fs::exists(records_path)) throw UsageError("records not found: " + o.records);
  const json records = read_json(records_path.string());
  std::map<GridKey, TrainingRecord> recs;
  for (const auto& cell : records) {
    if (!cell.contains("record")) continue;
    recs.emplace(GridKey{cell.at("group").get<std::string>(), cell.at("horizon").get<int>(),
                         cell.at("beta").get<double>()},
                 record_from_json(cell.at("record")));
  }
  if (recs.empty()) throw UsageError("no training records in " + records_path.string());
  std::vector<std::string> outputs;
  emit_convergence(o.output, recs, outputs);
  return 0;
}

std::atomic<httplib::Server*> g_server{nullptr};

int cmd_serve(const Options& o) {
  const auto world = load_story(o.story);
  const auto colon = o.bind.rfind(':');
  if (colon == std::string::npos) throw UsageError("--bind must be host:port");
  const std::string host = o.bind.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(o.bind.substr(colon + 1));
  } catch (const std::exception&) {
    throw UsageError("bad port in --bind");
  }
  fs::create_directories(o.traces);
  SessionManager sessions(world, TraceStore(o.traces));
  ServiceOptions so;
  so.client_dir = o.client_dir;
  auto server = make_server(sessions, so);
  g_server = server.get();
  std::signal(SIGINT, [](int) {
    if (auto* s = g_server.load()) s->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (auto* s = g_server.load()) s->stop();
  });
  std::atomic<bool> running{true};
  std::thread reaper([&] {
    while (running) {
      for (int i = 0; i < 600 && running; ++i) std::this_thread::sleep_for(std::chrono::milliseconds(100));
      if (running) sessions.reap_idle();
    }
  });
  std::cout << "serving " << world.title << " on http://" << o.bind << '\n' << std::flush;
  const bool ok = server->listen(host, port);
  running = false;
  reaper.join();
  g_server = nullptr;
  if (!ok) {
    std::cerr << "could not bind " << o.bind << '\n';
    return kExitRuntime;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reward learning from interactive narrative play traces"};
  app.require_subcommand(1);
  Options o;

  auto story = [&](CLI::App* c) { c->add_option("--story", o.story, "Story document")->capture_default_str(); };
  auto traces = [&](CLI::App* c) {
    c->add_option("--traces", o.traces, "Trace corpus directory (default $NA_DATA_DIR/traces)")->capture_default_str();
  };
  auto output = [&](CLI::App* c, const std::string& what) { c->add_option("--output", o.output, what); };
  auto seed = [&](CLI::App* c) { c->add_option("--seed", o.seed, "Random seed")->capture_default_str(); };
  auto learner = [&](CLI::App* c) {
    c->add_option("--horizon", o.horizon, "Planning horizon h")->capture_default_str();
    c->add_option("--beta", o.beta, "Boltzmann inverse temperature")->capture_default_str();
  };

  auto* validate = app.add_subcommand("validate", "Check a story and the reachability of its endings");
  story(validate);
  output(validate, "Write the reachability report (JSON)");
  validate->add_option("--cap", o.state_cap, "Search depth in actions")->capture_default_str();

  auto* play = app.add_subcommand("play", "Play in the terminal and record a trace");
  story(play);
  traces(play);
  output(play, "Trace file (default: saved into the corpus)");

  auto* synth = app.add_subcommand("synthesize", "Generate expert traces that reach an ending");
  story(synth);
  traces(synth);
  output(synth, "Corpus directory to write into (default --traces)");
  seed(synth);
  synth->add_option("--ending", o.ending, "Ending id (default: every ending)");
  synth->add_option("--n", o.n, "Traces per ending")->capture_default_str();
  synth->add_option("--beta", o.expert_beta, "Expert inverse temperature")->capture_default_str();
  synth->add_option("--horizon", o.expert_horizon, "Expert planning horizon")->capture_default_str();
  synth->add_option("--cap", o.cap, "Action cap")->capture_default_str();

  auto* trn = app.add_subcommand("train", "Learn reward weights from a trace group");
  story(trn);
  traces(trn);
  learner(trn);
  seed(trn);
  output(trn, "Weights + training record (JSON)");
  trn->add_option("--group", o.group, "end:<ending> or profile:<factor>:<0|1>");
  trn->add_option("--iterations", o.iterations, "Gradient steps")->capture_default_str();

  auto* roll = app.add_subcommand("rollout", "Execute a learned policy in the engine");
  story(roll);
  learner(roll);
  seed(roll);
  output(roll, "Generated trace (JSON)");
  roll->add_option("--weights", o.weights, "Weights file from train");
  roll->add_option("--cap", o.cap, "Action cap")->capture_default_str();
  roll->add_option("--mode", o.mode, "greedy or sampled")->capture_default_str();

  auto* eval = app.add_subcommand("evaluate", "Jaccard similarity of a policy trace against a group");
  story(eval);
  traces(eval);
  output(eval, "Similarity table (CSV)");
  eval->add_option("--policy", o.policy, "Policy trace file");
  eval->add_option("--group", o.group, "Group id");

  auto* grid = app.add_subcommand("grid", "Train, roll out and evaluate every (group, h, beta) cell");
  story(grid);
  traces(grid);
  seed(grid);
  output(grid, "Output directory");
  grid->add_option("--group", o.groups, "Group ids (default: every non-empty ending group)");
  grid->add_option("--horizon", o.horizons, "Horizons")->delimiter(',')->capture_default_str();
  grid->add_option("--beta", o.betas, "Betas")->delimiter(',')->capture_default_str();
  grid->add_option("--iterations", o.iterations, "Gradient steps")->capture_default_str();
  grid->add_option("--cap", o.cap, "Rollout action cap")->capture_default_str();
  grid->add_option("--jobs", o.jobs, "Parallel cells")->capture_default_str();

  auto* plot = app.add_subcommand("plot", "Redraw convergence tables and charts from grid records");
  plot->add_option("--records", o.records, "records.json written by grid")->required();
  output(plot, "Output directory");

  auto* serve = app.add_subcommand("serve", "Host play sessions over HTTP");
  story(serve);
  traces(serve);
  serve->add_option("--bind", o.bind, "host:port")->capture_default_str();
  serve->add_option("--client", o.client_dir, "Static client directory mounted at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitValidation;
  }

  try {
    if (*validate) return cmd_validate(o);
    if (*play) return cmd_play(o);
    if (*synth) return cmd_synthesize(o);
    if (*trn) return cmd_train(o);
    if (*roll) return cmd_rollout(o);
    if (*eval) return cmd_evaluate(o);
    if (*grid) return cmd_grid(o);
    if (*plot) return cmd_plot(o);
    if (*serve) return cmd_serve(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const SyntaxError& e) {
    std::cerr << "story error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "story error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ReplayError& e) {
    std::cerr << "trace error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}
