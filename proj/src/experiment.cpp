#include "dcda/experiment.hpp"

#include "dcda/bounds.hpp"
#include "dcda/errors.hpp"
#include "dcda/rng.hpp"
#include "dcda/trace_io.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace dcda {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt(double v) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

SvmParams svm_params(const ExperimentConfig& c) {
  SvmParams p;
  p.n = c.n;
  p.m = c.m;
  p.d = c.d;
  const double scale = c.svm_mu_scale / std::sqrt(static_cast<double>(c.d));
  p.mu_plus = Vector::Constant(c.d, scale);
  p.mu_minus = Vector::Constant(c.d, -scale);
  p.sigma = c.svm_sigma;
  p.c_svm = c.svm_c;
  p.seed = rng::derive_seed(c.seed, "data");
  return p;
}

}  // namespace

std::shared_ptr<Problem> make_problem(const ExperimentConfig& c) {
  const std::uint64_t seed = rng::derive_seed(c.seed, "data");
  if (c.family == "svm") {
    Problem p = gen_svm(svm_params(c));
    if (c.radius > 0.0) p.set = FeasibleSet::l2_ball(c.radius);
    return std::make_shared<Problem>(std::move(p));
  }
  if (c.family == "linreg") {
    return std::make_shared<Problem>(gen_linreg(LinregParams{c.n, c.m, c.d, c.noise_sigma, c.radius, seed}));
  }
  if (c.family == "robust") {
    return std::make_shared<Problem>(
        gen_robust(RobustParams{c.n, c.m, c.d, c.outlier_prob, c.outlier_sigma, c.inlier_sigma, seed}));
  }
  throw ConfigError("unknown problem family '" + c.family + "'");
}

Graph make_graph(const ExperimentConfig& c) {
  if (c.graph == "full") return make_full(c.n);
  if (c.graph == "ring") return make_ring(c.n, c.ring_l);
  if (c.graph == "random") return make_random(c.n, c.edge_p, rng::derive_seed(c.seed, "graph"));
  throw ConfigError("unknown graph kind '" + c.graph + "'");
}

SharePolicy make_policy(const ExperimentConfig& c, const Matrix& base) {
  if (c.policy == "static") return SharePolicy::make_static({base}, c.d);
  if (c.policy == "round_robin") return SharePolicy::make_round_robin(base, c.share_block(), c.d);
  if (c.policy == "randomized") {
    const std::uint64_t seed = rng::derive_seed(c.seed, "schedule");
    if (c.random_mode == "subset") return SharePolicy::make_randomized_subset(base, c.share_block(), c.d, seed);
    return SharePolicy::make_randomized_all_to_all(c.n, c.rho, c.d, seed);
  }
  throw ConfigError("unknown policy kind '" + c.policy + "'");
}

ChannelModel make_channel(const ExperimentConfig& c) {
  if (c.channel == "noisy") return NoisyChannel{c.gamma2, rng::derive_seed(c.seed, "channel")};
  if (c.channel == "quantized")
    return QuantizedChannel{ZoomSchedule{c.zoom_s0, c.zoom_beta}, rng::derive_seed(c.seed, "dither")};
  return PerfectChannel{};
}

GradientMode make_gradient(const ExperimentConfig& c) {
  if (c.gradient == "minibatch") return MiniBatch{c.batch, rng::derive_seed(c.seed, "minibatch")};
  return ExactGradient{};
}

std::optional<NodeData> make_test_set(const ExperimentConfig& c) {
  if (c.family != "svm") return std::nullopt;
  return gen_svm_test(svm_params(c), c.test_per_class, rng::derive_seed(c.seed, "test"));
}

double auto_step_constant(const Problem& problem, const ReferenceSolution& reference) {
  if (problem.loss == LossKind::least_squares) {
    Matrix h = Matrix::Zero(problem.d, problem.d);
    for (const NodeData& nd : problem.nodes) h += nd.features.transpose() * nd.features;
    h /= static_cast<double>(problem.n);
    const double top = Eigen::SelfAdjointEigenSolver<Matrix>(h, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
    if (!(top > 0.0)) throw ConfigError("step.C = auto: data matrix is zero");
    return 1.0 / top;
  }
  const double L = lipschitz_estimate(problem).value;
  if (!(L > 0.0)) throw ConfigError("step.C = auto: zero Lipschitz constant");
  double scale = std::sqrt(2.0 * reference.psi_star);
  if (!(scale > 1e-12)) {
    scale = problem.set.kind() == FeasibleSet::Kind::simplex ? std::sqrt(2.0 * std::log(problem.d)) : 1.0;
  }
  return scale / L;
}

RunConfig make_run_config(const ExperimentConfig& c) {
  RunConfig run;
  run.problem = make_problem(c);
  const Graph g = make_graph(c);
  run.policy = make_policy(c, mixing_from_graph(g));
  run.channel = make_channel(c);
  run.gradient = make_gradient(c);
  run.T = c.T;
  run.master_seed = c.seed;
  run.metric_every = c.metric_every;
  run.test_set = make_test_set(c);
  run.log_messages = !c.messages_path.empty();
  run.reference = centralized_reference(*run.problem, ReferenceOptions{c.T, c.reference_iterations});
  run.step.C = c.step_auto ? auto_step_constant(*run.problem, *run.reference) : c.step_c;
  run.validate();
  return run;
}

RunOutcome run_experiment(const ExperimentConfig& config, bool write_files) {
  RunOutcome out;
  RunConfig run;
  try {
    run = make_run_config(config);
  } catch (const NumericalError& e) {
    return {2, e.what(), std::nullopt};
  } catch (const std::exception& e) {
    return {1, e.what(), std::nullopt};
  }
  try {
    out.trace = dcda_run(run);
  } catch (const NumericalError& e) {
    return {2, e.what(), std::nullopt};
  } catch (const std::exception& e) {
    return {1, e.what(), std::nullopt};
  }
  if (write_files) {
    try {
      write_trace_csv(config.trace_path, *out.trace);
      auto metadata = out.trace->metadata;
      for (const auto& [k, v] : config.meta) metadata.emplace_back(k, v);
      std::stable_sort(metadata.begin(), metadata.end(),
                       [](const auto& a, const auto& b) { return a.first < b.first; });
      metadata.erase(std::unique(metadata.begin(), metadata.end(),
                                 [](const auto& a, const auto& b) { return a.first == b.first; }),
                     metadata.end());
      write_metadata(config.resolved_meta_path(), to_text(config), metadata);
      if (!config.messages_path.empty()) {
        std::ofstream os(config.messages_path, std::ios::binary);
        if (!os) throw ConfigError("cannot write " + config.messages_path);
        write_message_log(os, out.trace->messages);
      }
    } catch (const std::exception& e) {
      return {1, e.what(), std::move(out.trace)};
    }
  }
  return out;
}

std::optional<long> time_to_gap(const RunTrace& trace, double fraction) {
  const double target = fraction * trace.initial_gap;
  for (long t : trace.times()) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const TraceRow& r : trace.at(t)) worst = std::max(worst, r.f_gap);
    if (worst <= target) return t;
  }
  return std::nullopt;
}

std::optional<long> time_to_accuracy(const RunTrace& trace, double threshold) {
  for (long t : trace.times()) {
    const auto rows = trace.at(t);
    double acc = 0.0;
    for (const TraceRow& r : rows) acc += r.accuracy;
    acc /= static_cast<double>(rows.size());
    if (acc >= threshold) return t;
  }
  return std::nullopt;
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

std::string sanitize(const std::string& s) {
  std::string out;
  for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-') ? c : '_';
  return out;
}

SummaryRow summarize(const std::string& preset, const std::string& variant, std::uint64_t seed,
                     const RunOutcome& outcome, bool accuracy_threshold) {
  SummaryRow row;
  row.preset = preset;
  row.variant = variant;
  row.seed = seed;
  row.exit_code = outcome.exit_code;
  row.final_gap_max = kNaN;
  row.final_gap_mean = kNaN;
  row.final_accuracy = kNaN;
  if (!outcome.trace) return row;
  const RunTrace& tr = *outcome.trace;
  row.t_hit = accuracy_threshold ? time_to_accuracy(tr, 0.9) : time_to_gap(tr, 0.05);
  if (row.t_hit) row.transmissions_hit = tr.at(*row.t_hit).front().transmissions;
  const auto last = tr.at(tr.T);
  row.final_gap_max = -std::numeric_limits<double>::infinity();
  row.final_gap_mean = 0.0;
  double acc = 0.0;
  for (const TraceRow& r : last) {
    row.final_gap_max = std::max(row.final_gap_max, r.f_gap);
    row.final_gap_mean += r.f_gap;
    acc += r.accuracy;
  }
  row.final_gap_mean /= static_cast<double>(last.size());
  row.final_accuracy = acc / static_cast<double>(last.size());
  return row;
}

}  // namespace

int run_sweep(const SweepSpec& spec, unsigned threads, std::ostream& log) {
  struct Job {
    ExperimentConfig config;
    std::vector<std::string> values;
    std::uint64_t seed;
  };
  std::vector<std::pair<ConfigEntries, std::vector<std::string>>> combos{{spec.base, {}}};
  for (const auto& [param, values] : spec.params) {
    std::vector<std::pair<ConfigEntries, std::vector<std::string>>> next;
    for (const auto& [entries, labels] : combos) {
      for (const std::string& v : values) {
        ConfigEntries e = entries;
        e[param] = ConfigEntry{v, 0};
        auto l = labels;
        l.push_back(v);
        next.emplace_back(std::move(e), std::move(l));
      }
    }
    combos = std::move(next);
  }
  std::vector<Job> jobs;
  for (const auto& [entries, labels] : combos) {
    ParseResult parsed = build_config(entries);
    if (!parsed.ok()) {
      log << parsed.error_text();
      return 1;
    }
    std::vector<std::uint64_t> seeds = spec.seeds.empty() ? std::vector{parsed.config->seed} : spec.seeds;
    for (std::uint64_t seed : seeds) {
      ExperimentConfig c = *parsed.config;
      c.seed = seed;
      std::string stem;
      for (std::size_t p = 0; p < spec.params.size(); ++p)
        stem += sanitize(spec.params[p].first) + "-" + sanitize(labels[p]) + "_";
      stem += "seed" + std::to_string(seed);
      c.trace_path = (std::filesystem::path(spec.output_dir) / (stem + ".csv")).string();
      c.meta_path.clear();
      c.messages_path.clear();
      jobs.push_back({std::move(c), labels, seed});
    }
  }
  std::filesystem::create_directories(spec.output_dir);
  std::vector<SummaryRow> rows(jobs.size());
  std::mutex log_mutex;
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    const RunOutcome outcome = run_experiment(jobs[i].config);
    if (outcome.exit_code != 0) {
      std::lock_guard lock(log_mutex);
      log << jobs[i].config.trace_path << ": " << outcome.message << '\n';
    }
    rows[i] = summarize("sweep", std::filesystem::path(jobs[i].config.trace_path).stem().string(), jobs[i].seed,
                        outcome, jobs[i].config.family == "svm");
  });
  std::ofstream os(std::filesystem::path(spec.output_dir) / "sweep_summary.csv", std::ios::binary);
  write_summary_csv(os, rows);
  int worst = 0;
  for (const SummaryRow& r : rows) worst = std::max(worst, r.exit_code);
  return worst;
}

std::vector<PresetVariant> preset_variants(const std::string& preset, std::uint64_t seed, long T) {
  ExperimentConfig base = preset_base(preset);
  base.seed = seed;
  base.T = T;
  std::vector<PresetVariant> out;
  if (preset == "svm") {
    for (const auto& [name, f] : {std::pair{"f000", 0.0}, {"f025", 0.25}, {"f050", 0.5}, {"f100", 1.0}}) {
      ExperimentConfig c = base;
      c.fraction = f;
      out.push_back({name, c});
    }
  } else if (preset == "linreg") {
    out.push_back({"exact", base});
    ExperimentConfig mb = base;
    mb.gradient = "minibatch";
    mb.batch = 4;
    out.push_back({"minibatch4", mb});
    ExperimentConfig noisy = base;
    noisy.channel = "noisy";
    noisy.gamma2 = 1.0;
    out.push_back({"noisy", noisy});
  } else {
    // Equal budget: the randomized subset size equals the round-robin block (d / 2).
    const int m = base.d / 2;
    for (const auto& [pname, policy] : {std::pair{"rr", "round_robin"}, {"rand", "randomized"}}) {
      for (const auto& [gname, graph] : {std::pair{"full", "full"}, {"ring", "ring"}}) {
        ExperimentConfig c = base;
        c.policy = policy;
        c.random_mode = "subset";
        c.policy_m = m;
        c.graph = graph;
        c.ring_l = 1;
        out.push_back({std::string(pname) + "_" + gname, c});
      }
    }
  }
  for (auto& v : out) v.config.meta["variant"] = v.name;
  return out;
}

std::vector<SummaryRow> reproduce(const std::string& preset, const std::vector<std::uint64_t>& seeds,
                                  const std::filesystem::path& out_dir, long T, unsigned threads) {
  std::vector<std::pair<std::uint64_t, PresetVariant>> jobs;
  for (std::uint64_t seed : seeds)
    for (PresetVariant& v : preset_variants(preset, seed, T)) {
      v.config.trace_path = (out_dir / (preset + "_" + v.name + "_seed" + std::to_string(seed) + ".csv")).string();
      jobs.emplace_back(seed, std::move(v));
    }
  std::filesystem::create_directories(out_dir);
  std::vector<SummaryRow> rows(jobs.size());
  parallel_for(jobs.size(), threads, [&](std::size_t i) {
    const auto& [seed, v] = jobs[i];
    rows[i] = summarize(preset, v.name, seed, run_experiment(v.config), preset == "svm");
  });
  std::ofstream os(out_dir / (preset + "_summary.csv"), std::ios::binary);
  write_summary_csv(os, rows);
  return rows;
}

void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
  os << "preset,variant,seed,t_hit,transmissions_hit,final_gap_max,final_gap_mean,final_accuracy,exit_code\n";
  for (const SummaryRow& r : rows) {
    os << csv_field(r.preset) << ',' << csv_field(r.variant) << ',' << r.seed << ','
       << (r.t_hit ? std::to_string(*r.t_hit) : "") << ','
       << (r.transmissions_hit ? std::to_string(*r.transmissions_hit) : "") << ',' << fmt(r.final_gap_max) << ','
       << fmt(r.final_gap_mean) << ',' << fmt(r.final_accuracy) << ',' << r.exit_code << '\n';
  }
}

namespace {

double diameter(const Problem& problem, const RunTrace& trace, const ReferenceSolution* reference) {
  switch (problem.set.kind()) {
    case FeasibleSet::Kind::l2_ball:
      return 2.0 * problem.set.radius();
    case FeasibleSet::Kind::simplex:
      return 2.0;  // l1 diameter
    case FeasibleSet::Kind::unconstrained:
      break;
  }
  double radius = reference ? reference->x_star.norm() : 0.0;
  for (const TraceRow& r : trace.rows) radius = std::max(radius, r.x_norm);
  return 2.0 * radius;
}

template <class F>
double or_inf(F&& f) {
  try {
    return f();
  } catch (const DomainError&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

BoundsTable evaluate_bounds(const ExperimentConfig& config, const RunTrace& trace, double psi_star) {
  const std::shared_ptr<Problem> problem = make_problem(config);
  if (trace.n != problem->n) throw ConfigError("trace has " + std::to_string(trace.n) + " nodes, config has " +
                                               std::to_string(problem->n));
  if (trace.T != config.T) throw ConfigError("trace horizon does not match T in the config");
  const Matrix P = mixing_from_graph(make_graph(config));
  const SharePolicy policy = make_policy(config, P);
  const int n = problem->n;
  const int d = problem->d;
  if (trace.rows.empty()) throw ConfigError("trace has no rows");
  // Rows carry alpha(t - 1) = C / sqrt(t - 1), and alpha(0) = C.
  const TraceRow& first = trace.rows.front();
  const StepSchedule step{first.t > 1 ? first.alpha * std::sqrt(static_cast<double>(first.t - 1)) : first.alpha};

  BoundsTable table;
  table.psi_star = psi_star;
  table.L = certificate_lipschitz(*problem, trace);
  const double L = table.L;
  const double R = diameter(*problem, trace, nullptr);

  const bool perfect = config.channel == "perfect";
  const bool exact = config.gradient == "exact";
  table.has_certificate = perfect && exact && trace.metric_every == 1;

  const double sigma2 = second_singular_value(P);
  std::string policy_lemma;
  std::function<double(long)> policy_bound;
  if (config.policy == "static") {
    policy_lemma = "lemma1";
    policy_bound = [&, sigma2](long T) {
      return or_inf([&] { return bound_static(L, psi_star, step, d, n, T, sigma2); });
    };
  } else if (config.policy == "round_robin") {
    policy_lemma = "lemma2";
    policy_bound = [&, sigma2](long T) {
      return or_inf([&] { return bound_round_robin(L, psi_star, step, d, policy.block(), n, T, sigma2); });
    };
  } else {
    policy_lemma = "lemma3";
    const double s2e = second_singular_value(policy.expected_squared_mixing(0));
    policy_bound = [&, s2e](long T) {
      return or_inf([&] { return bound_randomized(L, psi_star, step, d, n, T, s2e, config.delta); });
    };
  }

  std::vector<std::function<double(long)>> lemmas;
  if (perfect && exact) {
    table.lemma_names.push_back(policy_lemma);
    lemmas.push_back(policy_bound);
  } else if (perfect) {
    table.lemma_names.push_back("lemma4");
    lemmas.push_back([&, policy_bound](long T) {
      return or_inf([&] { return bound_stochastic(policy_bound(T), L, R, T, config.delta); });
    });
  } else if (config.policy == "static" && exact) {
    if (config.channel == "noisy") {
      table.lemma_names.push_back("lemma5");
      lemmas.push_back([&, policy_bound, sigma2](long T) {
        return or_inf([&] {
          return bound_noisy(policy_bound(T), L, R, config.gamma2, n, d, T, step, sigma2, config.delta);
        });
      });
    } else {
      table.lemma_names.push_back("lemma6");
      const ZoomSchedule zoom{config.zoom_s0, config.zoom_beta};
      const std::vector<double> per_k(d, sigma2);
      auto nu = std::make_shared<std::vector<double>>();
      for (long t = 1; t <= trace.T; ++t) nu->push_back(nu_sequence(zoom, per_k, t));
      lemmas.push_back([&, policy_bound, zoom, nu](long T) {
        return or_inf([&] { return bound_quantized(policy_bound(T), L, R, zoom, n, d, T, step, *nu, config.delta); });
      });
    }
  }
  table.lemma_violations.assign(lemmas.size(), 0);

  std::vector<std::vector<double>> thm1;
  if (table.has_certificate) thm1 = bound_thm1_series(trace, psi_star, L, step);

  for (long T : trace.times()) {
    std::vector<double> lemma_values;
    for (const auto& f : lemmas) lemma_values.push_back(f(T));
    for (const TraceRow& r : trace.at(T)) {
      BoundsRow row;
      row.T = T;
      row.node = r.node;
      row.gap = r.f_gap / n;
      row.thm1 = table.has_certificate ? thm1[T - 1][r.node] : kNaN;
      row.lemmas = lemma_values;
      if (table.has_certificate && row.gap > row.thm1 * (1.0 + 1e-7)) {
        row.violation = true;
        ++table.certificate_violations;
      }
      for (std::size_t l = 0; l < lemma_values.size(); ++l)
        if (row.gap > lemma_values[l]) ++table.lemma_violations[l];
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

void write_bounds_csv(std::ostream& os, const BoundsTable& table) {
  os << "T,node,avg_gap,thm1";
  for (const auto& name : table.lemma_names) os << ',' << name;
  os << ",violation\n";
  for (const BoundsRow& r : table.rows) {
    os << r.T << ',' << r.node << ',' << fmt(r.gap) << ',' << fmt(r.thm1);
    for (double v : r.lemmas) os << ',' << fmt(v);
    os << ',' << (r.violation ? 1 : 0) << '\n';
  }
}

std::map<std::string, std::string> read_metadata(const std::filesystem::path& path) {
  std::vector<ConfigIssue> issues;
  const ConfigEntries entries = parse_entries(read_text_file(path), issues);
  std::map<std::string, std::string> out;
  for (const auto& [k, e] : entries)
    if (k.rfind("meta.", 0) == 0) out[k.substr(5)] = e.value;
  return out;
}

}  // namespace dcda
