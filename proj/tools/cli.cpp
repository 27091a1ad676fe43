//------------------------------------------------------------------------------
//
//   Copyright 2026 The renyi-vi Authors
//
//   Licensed under the Apache License, Version 2.0 (the "License");
//   you may not use this file except in compliance with the License.
//   You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
//   Unless required by applicable law or agreed to in writing, software
//   distributed under the License is distributed on an "AS IS" BASIS,
//   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//   See the License for the specific language governing permissions and
//   limitations under the License.
//
//------------------------------------------------------------------------------

#include "cli.hpp"

#include "renyi/config.hpp"
#include "renyi/experiments.hpp"
#include "renyi/varfit.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace renyi::cli {

namespace {

using config::ConfigError;
using nlohmann::json;

/// A usage or configuration problem; maps to exit code 1.
struct UsageError
{
  std::string message;
};

struct LoadedConfig
{
  std::string path;
  std::string text;
  json value = json::object();
};

LoadedConfig load_config(std::string const &path)
{
  LoadedConfig c;
  c.path = path;
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    throw UsageError{path + ": cannot open config file"};
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  c.text = buf.str();
  try
  {
    c.value = json::parse(c.text);
  }
  catch (json::parse_error const &e)
  {
    auto const [line, col] = config::line_column(c.text, e.byte > 0 ? e.byte - 1 : 0);
    throw UsageError{path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                     ": invalid JSON: " + e.what()};
  }
  if (!c.value.is_object())
  {
    throw UsageError{path + ":1: the config must be a JSON object"};
  }
  return c;
}

std::string anchored(LoadedConfig const &c, ConfigError const &e)
{
  if (c.path.empty())
  {
    return e.what();
  }
  std::size_t const line = config::locate_key(c.text, e.key());
  return c.path + ":" + (line ? std::to_string(line) + ":" : std::string()) + " " + e.what();
}

/// Applies the seed precedence: flag, then RENYI_VI_SEED, then the config value.
void apply_seed(json &cfg, std::optional<std::uint64_t> flag)
{
  if (char const *env = std::getenv("RENYI_VI_SEED"); env && *env)
  {
    char *end                = nullptr;
    unsigned long long value = std::strtoull(env, &end, 10);
    if (*end != '\0' || env[0] == '-')
    {
      throw UsageError{std::string("RENYI_VI_SEED must be a non-negative integer, got '") + env + "'"};
    }
    cfg["seed"] = static_cast<std::uint64_t>(value);
  }
  if (flag)
  {
    cfg["seed"] = *flag;
  }
}

std::uint64_t seed_of(json const &cfg)
{
  auto it = cfg.find("seed");
  return (it != cfg.end() && it->is_number_unsigned()) ? it->get<std::uint64_t>() : 0;
}

std::string utc_timestamp()
{
  std::time_t const now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

void write_text(std::filesystem::path const &path, std::string const &text)
{
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out)
  {
    throw Error("cannot write " + path.string());
  }
}

std::string measured_text(double v)
{
  if (std::isinf(v))
  {
    return v > 0 ? "inf" : "-inf";
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void print_verdicts(experiments::ExperimentReport const &report, std::ostream &out)
{
  for (auto const &v : report.verdicts)
  {
    out << (v.pass ? "PASS " : "FAIL ") << report.experiment << " " << v.criterion
        << " measured=" << measured_text(v.measured) << " expected " << v.expected << "\n";
  }
}

//------------------------------------------------------------------------------
// experiment / audit
//------------------------------------------------------------------------------

struct RunFlags
{
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "runs";
  std::size_t jobs    = 1;
  std::string timestamp;
};

int run_named(std::string name, RunFlags const &flags, std::ostream &out, std::ostream &err)
{
  LoadedConfig loaded;
  if (!flags.config_path.empty())
  {
    loaded = load_config(flags.config_path);
  }
  json cfg = loaded.value;
  if (auto it = cfg.find("experiment"); it != cfg.end())
  {
    if (!it->is_string())
    {
      throw UsageError{anchored(loaded, ConfigError("experiment", "'experiment' must be a string"))};
    }
    if (name.empty())
    {
      name = it->get<std::string>();
    }
    else if (name != it->get<std::string>())
    {
      throw UsageError{anchored(
          loaded, ConfigError("experiment", "config names experiment '" + it->get<std::string>() +
                                                "' but the command line names '" + name + "'"))};
    }
    cfg.erase("experiment");
  }
  if (name.empty())
  {
    throw UsageError{"no experiment named; pass one on the command line or set 'experiment'"};
  }
  apply_seed(cfg, flags.seed);

  json echo;
  try
  {
    echo = experiments::resolve_config(name, cfg);
  }
  catch (ConfigError const &e)
  {
    throw UsageError{anchored(loaded, e)};
  }

  std::string const stamp = flags.timestamp.empty() ? utc_timestamp() : flags.timestamp;
  experiments::ExperimentReport report;
  int code = kPass;
  try
  {
    report = experiments::run_experiment(name, cfg, experiments::RunOptions{flags.jobs});
    code   = report.passed() ? kPass : kRunFailed;
  }
  catch (Error const &e)
  {
    report            = experiments::ExperimentReport{};
    report.experiment = name;
    report.config     = echo;
    report.summary    = {{"error", e.what()}};
    report.verdicts.push_back({"run_completed", false, 0.0, "the run finishes without error"});
    err << "error: " << e.what() << "\n";
    code = kRunFailed;
  }
  auto const dir = experiments::write_report(report, flags.out_dir, stamp, seed_of(echo));
  print_verdicts(report, out);
  out << "report: " << dir.string() << "\n";
  return code;
}

//------------------------------------------------------------------------------
// fit
//------------------------------------------------------------------------------

struct FitJob
{
  varfit::Target target;
  std::shared_ptr<varfit::VariationalFamily const> family;
  bool stochastic = false;
  varfit::FitOptions options;
  varfit::StochasticOptions stochastic_options;
  json echo;
};

FitJob parse_fit(json const &cfg)
{
  config::Reader r(cfg, "fit config");
  FitJob job;
  std::string const family = r.text("family");
  try
  {
    job.family = varfit::make_family(family);
  }
  catch (Error const &e)
  {
    r.fail("family", e.what());
  }
  std::string const objective = r.text("objective", "renyi-alpha");
  varfit::ObjectiveKind kind;
  try
  {
    kind = varfit::objective_from_string(objective);
  }
  catch (Error const &e)
  {
    r.fail("objective", e.what());
  }
  bool const needs_alpha =
      kind == varfit::ObjectiveKind::renyi_alpha || kind == varfit::ObjectiveKind::mc_upper_bound;
  if (needs_alpha && !r.has("alpha"))
  {
    r.fail("objective", "objective '" + objective + "' requires 'alpha'");
  }
  double const alpha = needs_alpha ? r.number("alpha") : r.number("alpha", 2.0);
  if (!(alpha > 1.0))
  {
    r.fail("alpha", "'alpha' must be greater than 1");
  }
  std::uint64_t const seed = r.count("seed", 1);
  std::string const optimizer = r.text("optimizer", "deterministic");
  if (optimizer != "deterministic" && optimizer != "stochastic")
  {
    r.fail("optimizer", "'optimizer' must be 'deterministic' or 'stochastic'");
  }
  job.stochastic = optimizer == "stochastic";
  if (job.stochastic && kind != varfit::ObjectiveKind::renyi_alpha &&
      kind != varfit::ObjectiveKind::mc_upper_bound)
  {
    r.fail("optimizer", "the stochastic optimizer minimises the Renyi bound only");
  }

  json model_echo = nullptr, data_echo = nullptr, target_echo = nullptr;
  if (r.has("target"))
  {
    if (r.has("model"))
    {
      r.fail("target", "give either 'target' or 'model', not both");
    }
    target_echo = r.raw("target");
    try
    {
      job.target = varfit::target_from_density(dist::from_json(target_echo));
    }
    catch (ConfigError const &)
    {
      throw;
    }
    catch (Error const &e)
    {
      r.fail("target", e.what());
    }
  }
  else
  {
    model_echo = r.raw("model");
    std::shared_ptr<models::BayesModel> model;
    try
    {
      model = models::model_from_json(model_echo);
    }
    catch (Error const &e)
    {
      r.fail("model", e.what());
    }
    config::Reader d(r.raw("data"), "fit config 'data'");
    models::Dataset data;
    if (d.has("csv"))
    {
      std::string const path = d.text("csv");
      try
      {
        data = models::load_csv(path, model->dim());
      }
      catch (Error const &e)
      {
        d.fail("csv", e.what());
      }
      data_echo = {{"csv", path}, {"rows", data.size()}};
    }
    else
    {
      std::size_t const n  = d.count("n");
      double const theta0  = d.number("theta0", model->name() == "exponential" ? 2.0 : 0.5);
      std::uint64_t const data_seed = d.count("seed", seed);
      if (n == 0)
      {
        d.fail("n", "'n' must be positive");
      }
      std::vector<double> theta(model->dim(), theta0);
      data      = model->simulate(theta, n, data_seed);
      data_echo = {{"n", n}, {"theta0", theta0}, {"seed", data_seed}};
    }
    d.finish();
    job.target = varfit::target_from_model(*model, data);
  }

  job.options.kind     = kind;
  job.options.alpha    = alpha;
  job.options.seed     = seed;
  job.options.budget   = r.count("budget", job.options.budget);
  job.options.mc_draws = r.count("mc_draws", job.options.mc_draws);

  auto &so = job.stochastic_options;
  so.alpha = alpha;
  so.seed  = seed;
  if (r.has("stochastic"))
  {
    config::Reader s(r.raw("stochastic"), "fit config 'stochastic'");
    so.steps      = s.count("steps", so.steps);
    so.batch      = s.count("batch", so.batch);
    so.step_size  = s.number("step_size", so.step_size);
    so.decay      = s.number("decay", so.decay);
    so.fd_step    = s.number("fd_step", so.fd_step);
    so.validation = s.count("validation", so.validation);
    s.finish();
  }
  r.finish();

  job.echo = {{"family", family},
              {"objective", objective},
              {"alpha", alpha},
              {"seed", seed},
              {"optimizer", optimizer},
              {"budget", job.options.budget},
              {"mc_draws", job.options.mc_draws},
              {"model", model_echo},
              {"data", data_echo},
              {"target", target_echo}};
  if (job.stochastic)
  {
    job.echo["stochastic"] = {{"steps", so.steps},         {"batch", so.batch},
                              {"step_size", so.step_size}, {"decay", so.decay},
                              {"fd_step", so.fd_step},     {"validation", so.validation}};
  }
  return job;
}

int run_fit(RunFlags const &flags, std::ostream &out, std::ostream &err)
{
  if (flags.config_path.empty())
  {
    throw UsageError{"fit needs --config"};
  }
  auto loaded = load_config(flags.config_path);
  json cfg    = loaded.value;
  apply_seed(cfg, flags.seed);
  FitJob job;
  try
  {
    job = parse_fit(cfg);
  }
  catch (ConfigError const &e)
  {
    throw UsageError{anchored(loaded, e)};
  }

  std::string const stamp = flags.timestamp.empty() ? utc_timestamp() : flags.timestamp;
  auto const dir = std::filesystem::path(flags.out_dir) /
                   ("fit_" + stamp + "_" + std::to_string(job.echo["seed"].get<std::uint64_t>()));
  json result;
  int code = kPass;
  try
  {
    auto fit = job.stochastic ? varfit::fit_stochastic(job.target, *job.family, job.stochastic_options)
                              : varfit::fit(job.target, *job.family, job.options);
    fit.config = job.echo;
    result     = fit.to_json();
    code       = fit.converged ? kPass : kRunFailed;
    if (!fit.converged)
    {
      err << "fit did not converge within the budget\n";
    }
  }
  catch (varfit::DominanceError const &e)
  {
    result = {{"config", job.echo}, {"error", std::string("dominance: ") + e.what()}};
    err << "error: dominance: " << e.what() << "\n";
    code = kRunFailed;
  }
  catch (Error const &e)
  {
    result = {{"config", job.echo}, {"error", e.what()}};
    err << "error: " << e.what() << "\n";
    code = kRunFailed;
  }
  write_text(dir / "fit.json", result.dump(2) + "\n");
  out << result.dump(2) << "\n";
  out << "report: " << dir.string() << "\n";
  return code;
}

//------------------------------------------------------------------------------
// divergence
//------------------------------------------------------------------------------

struct DivergenceFlags
{
  std::string config_path;
  std::string p, q;
  std::optional<double> alpha;
  std::string objective;
};

int run_divergence(DivergenceFlags const &flags, std::ostream &out)
{
  LoadedConfig loaded;
  if (!flags.config_path.empty())
  {
    loaded = load_config(flags.config_path);
  }
  json cfg = loaded.value;
  auto inline_json = [](std::string const &text, char const *what) {
    try
    {
      return json::parse(text);
    }
    catch (json::parse_error const &e)
    {
      throw UsageError{std::string("--") + what + ": invalid JSON: " + e.what()};
    }
  };
  if (!flags.p.empty())
  {
    cfg["p"] = inline_json(flags.p, "p");
  }
  if (!flags.q.empty())
  {
    cfg["q"] = inline_json(flags.q, "q");
  }
  if (flags.alpha)
  {
    cfg["alpha"] = *flags.alpha;
  }
  if (!flags.objective.empty())
  {
    cfg["objective"] = flags.objective;
  }

  json result;
  try
  {
    config::Reader r(cfg, "divergence config");
    auto density = [&](std::string const &key) {
      auto const &raw = r.raw(key);
      try
      {
        return dist::from_json(raw);
      }
      catch (Error const &e)
      {
        r.fail(key, e.what());
      }
    };
    auto const p = density("p");
    auto const q = density("q");
    std::string const objective = r.text("objective", "all");
    if (objective != "all" && objective != "renyi" && objective != "kl-forward" &&
        objective != "kl-reverse")
    {
      r.fail("objective", "'objective' must be all, renyi, kl-forward or kl-reverse");
    }
    if (objective == "renyi" && !r.has("alpha"))
    {
      r.fail("objective", "objective 'renyi' requires 'alpha'");
    }
    auto const alpha = r.optional_number("alpha");
    if (alpha && !(*alpha > 1.0))
    {
      r.fail("alpha", "'alpha' must be greater than 1");
    }
    r.finish();
    result["p"] = p.describe();
    result["q"] = q.describe();
    if ((objective == "all" || objective == "renyi") && alpha)
    {
      result["renyi"] = divergence::renyi(p, q, *alpha).to_json();
    }
    if (objective == "all" || objective == "kl-forward")
    {
      result["kl_forward"] = divergence::kl_forward(p, q).to_json();
    }
    if (objective == "all" || objective == "kl-reverse")
    {
      result["kl_reverse"] = divergence::kl_reverse(p, q).to_json();
    }
  }
  catch (ConfigError const &e)
  {
    throw UsageError{anchored(loaded, e)};
  }
  out << result.dump(2) << "\n";
  return kPass;
}

std::string experiment_list()
{
  std::string s;
  for (auto const &n : experiments::experiment_names())
  {
    s += (s.empty() ? "" : ", ") + n;
  }
  return s;
}

void add_run_flags(CLI::App &cmd, RunFlags &flags, bool config_required)
{
  auto *c = cmd.add_option("-c,--config", flags.config_path, "JSON config file");
  if (config_required)
  {
    c->required();
  }
  cmd.add_option("--seed", flags.seed, "Seed; overrides RENYI_VI_SEED and the config");
  cmd.add_option("-o,--out", flags.out_dir, "Output root directory")->capture_default_str();
  cmd.add_option("-j,--jobs", flags.jobs, "Worker threads for independent cells")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd.add_option("--timestamp", flags.timestamp,
                 "Run-directory timestamp (default: current UTC time)");
}

}  // namespace

int run(std::vector<std::string> args, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Renyi variational inference: fits, good-sequence audits and experiments.\n"
               "Exit codes: 0 pass, 1 usage or config error, 2 ran but failed.\n"
               "Seed precedence: --seed, then RENYI_VI_SEED, then the config 'seed'."};
  app.name(args.empty() ? "renyi-vi" : std::filesystem::path(args[0]).filename().string());
  app.require_subcommand(1);

  RunFlags fit_flags, exp_flags, audit_flags;
  std::string exp_name;
  DivergenceFlags div_flags;

  auto *fit = app.add_subcommand("fit", "Fit a variational family to a posterior or density");
  add_run_flags(*fit, fit_flags, true);

  auto *exp = app.add_subcommand("experiment", "Run a named experiment and write its report");
  exp->add_option("name", exp_name, "One of: " + experiment_list());
  add_run_flags(*exp, exp_flags, false);

  auto *aud = app.add_subcommand("audit", "Audit a good sequence against the exact posterior");
  add_run_flags(*aud, audit_flags, false);

  auto *div = app.add_subcommand("divergence", "Renyi and KL divergences between two densities");
  div->add_option("-c,--config", div_flags.config_path, "JSON config file");
  div->add_option("--p", div_flags.p, "First density as JSON");
  div->add_option("--q", div_flags.q, "Second density as JSON");
  div->add_option("--alpha", div_flags.alpha, "Renyi order (> 1)");
  div->add_option("--objective", div_flags.objective, "all, renyi, kl-forward or kl-reverse");

  std::vector<char *> argv;
  for (auto &a : args)
  {
    argv.push_back(a.data());
  }
  try
  {
    app.parse(static_cast<int>(argv.size()), argv.data());
  }
  catch (CLI::ParseError const &e)
  {
    int const code = app.exit(e, out, err);
    return code == 0 ? kPass : kUsageError;
  }

  try
  {
    if (*fit)
    {
      return run_fit(fit_flags, out, err);
    }
    if (*exp)
    {
      if (!exp_name.empty())
      {
        auto const &names = experiments::experiment_names();
        if (std::find(names.begin(), names.end(), exp_name) == names.end())
        {
          throw UsageError{"unknown experiment '" + exp_name + "'; valid names: " + experiment_list()};
        }
      }
      return run_named(exp_name, exp_flags, out, err);
    }
    if (*aud)
    {
      return run_named("goodseq-audit", audit_flags, out, err);
    }
    return run_divergence(div_flags, out);
  }
  catch (UsageError const &e)
  {
    err << "error: " << e.message << "\n";
    return kUsageError;
  }
  catch (ConfigError const &e)
  {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  }
  catch (Error const &e)
  {
    err << "error: " << e.what() << "\n";
    return kRunFailed;
  }
}

}  // namespace renyi::cli
