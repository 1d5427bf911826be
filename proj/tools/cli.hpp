#pragma once

// Command-line front end. Kept in a header so tests can drive `run` in-process.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "xrisk/xrisk.hpp"

namespace xrisk::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2 };

// Streams bound to "-" (stdin/stdout) or files.
struct Io {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
};

namespace detail {

inline std::string read_all(const std::string& path, Io& io) {
  if (path == "-") {
    std::ostringstream ss;
    ss << io.in.rdbuf();
    return ss.str();
  }
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

inline std::vector<std::string> read_lines(const std::string& path, Io& io) {
  std::istringstream ss(read_all(path, io));
  return xrisk::read_lines(ss);
}

inline void write_all(const std::string& path, const std::string& content, Io& io) {
  if (path == "-") {
    io.out << content;
    io.out.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot write '" + path + "'");
  f << content;
  if (!f) throw Error("write failed for '" + path + "'");
}

// "5" and "0.05" both mean five percent.
inline double percent(double v) { return v > 1.0 ? v / 100.0 : v; }

inline RecordFormat score_format(const std::string& flag, const std::string& path) {
  if (flag == "jsonl") return RecordFormat::jsonl;
  if (flag == "csv") return RecordFormat::csv;
  const bool csv_ext = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  return csv_ext ? RecordFormat::csv : RecordFormat::jsonl;
}

inline std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline std::string report_csv_header() { return "name,alpha,beta,tpauc,pauc,auc,ap,n_pos,n_neg\n"; }

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q.push_back('"');
    q.push_back(c);
  }
  return q + "\"";
}

inline std::string report_csv_row(const NamedReport& r) {
  return csv_quote(r.name) + ',' + fmt("%g", r.report.params.alpha) + ',' + fmt("%g", r.report.params.beta) + ',' +
         fmt("%.2f", r.report.tpauc) + ',' + fmt("%.2f", r.report.pauc) + ',' + fmt("%.2f", r.report.auc) + ',' +
         fmt("%.2f", r.report.ap) + ',' + std::to_string(r.report.n_pos) + ',' + std::to_string(r.report.n_neg) + '\n';
}

// Flat key=value lines; '#' starts a comment.
inline std::map<std::string, std::string> read_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream ss(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto trimmed = corpus::detail::trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string_view::npos) throw ParseError(line_no, "expected key=value");
    kv[std::string(corpus::detail::trim(trimmed.substr(0, eq)))] = std::string(corpus::detail::trim(trimmed.substr(eq + 1)));
  }
  return kv;
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "' expects a number, got '" + v + "'");
  }
}

}  // namespace detail

struct EvaluateArgs {
  std::string input = "-", output = "-", format = "json", input_format = "auto", preset = "default";
  double alpha = XRiskParams{}.alpha, beta = XRiskParams{}.beta;
  std::vector<std::string> group_by;
};

inline XRiskParams resolve_params(const EvaluateArgs& a, const CLI::App& cmd) {
  XRiskParams p = a.preset == "adversarial" ? kAdversarialParams : XRiskParams{};
  if (cmd.count("--alpha")) p.alpha = detail::percent(a.alpha);
  if (cmd.count("--beta")) p.beta = detail::percent(a.beta);
  p.validate();
  return p;
}

inline void cmd_evaluate(const EvaluateArgs& a, const XRiskParams& params, Io& io) {
  const auto samples = parse_samples(detail::read_lines(a.input, io), detail::score_format(a.input_format, a.input));
  const auto grouped = group_by(samples, a.group_by);
  for (const auto& s : grouped.skipped)
    io.err << "skipped group '" << s.group << "': no " << s.missing_class << " samples\n";
  std::string out = a.format == "csv" ? detail::report_csv_header() : "";
  for (const auto& [gid, set] : grouped.groups) {
    const NamedReport r{gid, evaluate(set, params)};
    out += a.format == "csv" ? detail::report_csv_row(r) : to_json(r).dump() + "\n";
  }
  detail::write_all(a.output, out, io);
}

struct RankArgs {
  std::vector<std::string> inputs;
  std::string output = "-", format = "json";
};

inline void cmd_rank(const RankArgs& a, Io& io) {
  std::vector<NamedReport> reports;
  for (const auto& path : a.inputs) {
    const auto lines = detail::read_lines(path, io);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (csv::is_blank(lines[i])) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(lines[i]);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(i + 1, path + ": " + e.what());
      }
      reports.push_back(report_from_json(j));
    }
  }
  if (reports.empty()) throw ValueError("no reports to rank");
  const auto ranked = rank_reports(std::move(reports));
  std::string out = a.format == "csv" ? "rank," + detail::report_csv_header() : "";
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (a.format == "csv") {
      out += std::to_string(k + 1) + "," + detail::report_csv_row(ranked[k]);
    } else {
      nlohmann::ordered_json j;
      j["rank"] = k + 1;
      const auto row = to_json(ranked[k]);
      for (const auto& [key, v] : row.items()) j[key] = v;
      out += j.dump() + "\n";
    }
  }
  detail::write_all(a.output, out, io);
}

struct ThresholdArgs {
  std::string input = "-", output = "-", input_format = "auto";
  std::vector<double> fixed, max_fpr, min_precision;
};

inline void cmd_threshold(const ThresholdArgs& a, Io& io) {
  if (a.fixed.empty() && a.max_fpr.empty() && a.min_precision.empty())
    throw ConfigError("threshold needs at least one of --fixed, --max-fpr, --min-precision");
  const auto set = split_by_label(
      parse_samples(detail::read_lines(a.input, io), detail::score_format(a.input_format, a.input)));
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (double t : a.fixed) out.push_back(to_json(fixed_threshold(set, t)));
  for (double b : a.max_fpr) out.push_back(to_json(threshold_at_max_fpr(set, detail::percent(b))));
  for (double p : a.min_precision) out.push_back(to_json(threshold_at_min_precision(set, detail::percent(p))));
  detail::write_all(a.output, out.dump(2) + "\n", io);
}

struct DeployArgs {
  std::string choices, input = "-", output = "-", input_format = "auto";
};

inline void cmd_deploy(const DeployArgs& a, Io& io) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(detail::read_all(a.choices, io));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(1, a.choices + ": " + e.what());
  }
  std::vector<ThresholdChoice> choices;
  if (j.is_array()) {
    for (const auto& c : j) choices.push_back(choice_from_json(c));
  } else {
    choices.push_back(choice_from_json(j));
  }
  const auto deploy = split_by_label(
      parse_samples(detail::read_lines(a.input, io), detail::score_format(a.input_format, a.input)));
  std::ostringstream out;
  write_deployment_csv(out, deployment_report(choices, deploy));
  detail::write_all(a.output, out.str(), io);
}

struct TrainArgs {
  std::string input, validation, output = "-", config, init, scorer = "linear", mode = "full_batch";
  std::string objective;
  std::size_t hidden = 8;
  dxo::DxoConfig cfg;
};

// Defaults < config file < explicit flags.
inline dxo::DxoConfig resolve_train_config(TrainArgs& a, const CLI::App& cmd, Io& io) {
  dxo::DxoConfig cfg;
  if (!a.config.empty()) {
    for (const auto& [key, v] : detail::read_key_values(detail::read_all(a.config, io))) {
      if (key == "objective") cfg.objective = dxo::objective_from_string(v);
      else if (key == "lambda") cfg.lambda = detail::to_double(key, v);
      else if (key == "lambda_prime") cfg.lambda_prime = detail::to_double(key, v);
      else if (key == "margin") cfg.margin = detail::to_double(key, v);
      else if (key == "lr" || key == "learning_rate") cfg.learning_rate = detail::to_double(key, v);
      else if (key == "epochs") cfg.epochs = static_cast<std::size_t>(detail::to_double(key, v));
      else if (key == "batch_size") cfg.batch_size = static_cast<std::size_t>(detail::to_double(key, v));
      else if (key == "sampling_rate") cfg.sampling_rate = detail::to_double(key, v);
      else if (key == "ma_gamma" || key == "gamma") cfg.ma_gamma = detail::to_double(key, v);
      else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(detail::to_double(key, v));
      else if (key == "alpha") cfg.eval_params.alpha = detail::percent(detail::to_double(key, v));
      else if (key == "beta") cfg.eval_params.beta = detail::percent(detail::to_double(key, v));
      else if (key == "mode") a.mode = v;
      else if (key == "scorer") a.scorer = v;
      else if (key == "hidden") a.hidden = static_cast<std::size_t>(detail::to_double(key, v));
      else throw ConfigError("unknown config key '" + key + "'");
    }
  }
  if (cmd.count("--objective")) cfg.objective = dxo::objective_from_string(a.objective);
  if (cmd.count("--lambda")) cfg.lambda = a.cfg.lambda;
  if (cmd.count("--lambda-prime")) cfg.lambda_prime = a.cfg.lambda_prime;
  if (cmd.count("--margin")) cfg.margin = a.cfg.margin;
  if (cmd.count("--lr")) cfg.learning_rate = a.cfg.learning_rate;
  if (cmd.count("--epochs")) cfg.epochs = a.cfg.epochs;
  if (cmd.count("--batch-size")) cfg.batch_size = a.cfg.batch_size;
  if (cmd.count("--sampling-rate")) cfg.sampling_rate = a.cfg.sampling_rate;
  if (cmd.count("--gamma")) cfg.ma_gamma = a.cfg.ma_gamma;
  if (cmd.count("--seed")) cfg.seed = a.cfg.seed;
  if (cmd.count("--alpha")) cfg.eval_params.alpha = detail::percent(a.cfg.eval_params.alpha);
  if (cmd.count("--beta")) cfg.eval_params.beta = detail::percent(a.cfg.eval_params.beta);
  cfg.validate();
  return cfg;
}

inline void cmd_train(TrainArgs& a, const CLI::App& cmd, Io& io) {
  const auto cfg = resolve_train_config(a, cmd, io);
  std::istringstream train_text(detail::read_all(a.input, io));
  const auto data = dxo::parse_feature_csv(train_text);
  std::optional<dxo::FeatureDataset> validation;
  if (!a.validation.empty()) {
    std::istringstream val_text(detail::read_all(a.validation, io));
    validation = dxo::parse_feature_csv(val_text);
  }
  std::optional<dxo::Scorer> init;
  if (!a.init.empty()) {
    try {
      init = dxo::scorer_from_json(nlohmann::json::parse(detail::read_all(a.init, io)));
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(1, a.init + ": " + e.what());
    }
  } else if (dxo::scorer_kind_from_string(a.scorer) == dxo::ScorerKind::mlp1) {
    init = dxo::Scorer::mlp1(data.dim, a.hidden, cfg.seed);
  }
  const auto result =
      dxo::train(data, cfg, dxo::train_mode_from_string(a.mode), init, validation ? &*validation : nullptr);
  detail::write_all(a.output, dxo::to_json(result).dump() + "\n", io);
}

struct BinocularsArgs {
  std::string input = "-", output = "-";
};

inline void cmd_binoculars(const BinocularsArgs& a, Io& io) {
  const auto text = detail::read_all(a.input, io);
  std::vector<std::pair<std::string, nlohmann::json>> records;
  if (auto whole = nlohmann::json::parse(text, nullptr, false); !whole.is_discarded() && whole.is_object()) {
    records.emplace_back(whole.contains("id") ? xrisk::detail::json_to_text(whole["id"]) : "1", std::move(whole));
  } else {
    std::istringstream ss(text);
    const auto lines = xrisk::read_lines(ss);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      if (csv::is_blank(lines[i])) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(lines[i]);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(i + 1, e.what());
      }
      if (!j.is_object() || !j.contains("id")) throw ParseError(i + 1, "batch records need an 'id' field");
      records.emplace_back(xrisk::detail::json_to_text(j["id"]), std::move(j));
    }
  }
  std::string out;
  for (const auto& [id, rec] : records) {
    binoculars::ScoreSummary s;
    try {
      s = binoculars::summarize(binoculars::sequence_from_json(rec));
    } catch (const Error& e) {
      throw Error("record '" + id + "': " + e.what());
    }
    nlohmann::ordered_json j;
    j["id"] = id;
    j["log_ppl"] = s.log_ppl;
    j["x_ppl"] = s.x_ppl;
    j["binoculars"] = s.binoculars;
    j["detector_score"] = s.detector_score;
    out += j.dump() + "\n";
  }
  detail::write_all(a.output, out, io);
}

struct QualityArgs {
  std::string input = "-", output = "-";
};

inline void cmd_quality(const QualityArgs& a, Io& io) {
  const auto lines = detail::read_lines(a.input, io);
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (csv::is_blank(lines[i])) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(i + 1, e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("text") || !j["text"].is_string())
      throw ParseError(i + 1, "records need 'id' and string 'text' fields");
    const auto report = corpus::quality_report(j["text"].get<std::string>());
    nlohmann::ordered_json row;
    row["id"] = xrisk::detail::json_to_text(j["id"]);
    row["pass"] = report.passed;
    row["failed_checks"] = report.failed_checks();
    out += row.dump() + "\n";
  }
  detail::write_all(a.output, out, io);
}

struct MixcaseArgs {
  std::string input = "-", output = "-";
  std::uint64_t seed = 0;
  std::size_t draws = 1;
};

inline void cmd_mixcase(const MixcaseArgs& a, Io& io) {
  std::vector<std::uint64_t> lengths;
  const auto lines = detail::read_lines(a.input, io);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto t = corpus::detail::trim(lines[i]);
    if (t.empty()) continue;
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) throw ParseError(i + 1, "expected a token count");
    lengths.push_back(v);
  }
  const corpus::MixcasePlanner planner(std::move(lengths));
  Rng rng(a.seed);
  std::string out;
  for (std::size_t k = 0; k < a.draws; ++k) {
    const auto plan = planner.draw(rng);
    nlohmann::ordered_json j;
    j["T"] = plan.total;
    j["H"] = plan.human_prefix;
    j["N"] = plan.generated;
    out += j.dump() + "\n";
  }
  detail::write_all(a.output, out, io);
}

inline int run(const std::vector<std::string>& args, Io io) {
  CLI::App app{"Evaluation, threshold selection and X-risk training for AI-generated-text detectors", "xrisk"};
  app.require_subcommand(1);

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Per-group tpAUC/pAUC/AUC/AP reports from scored samples");
  evaluate_cmd->add_option("--input,-i", ev.input, "Scores (JSONL or CSV); '-' for stdin");
  evaluate_cmd->add_option("--output,-o", ev.output, "Report destination; '-' for stdout");
  evaluate_cmd->add_option("--format", ev.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
  evaluate_cmd->add_option("--input-format", ev.input_format)->check(CLI::IsMember({"auto", "jsonl", "csv"}));
  evaluate_cmd->add_option("--alpha", ev.alpha, "Minimum TPR (0.5 or 50)");
  evaluate_cmd->add_option("--beta", ev.beta, "Maximum FPR (0.05 or 5)");
  evaluate_cmd->add_option("--preset", ev.preset, "default (50%, 5%) or adversarial (40%, 30%)")
      ->check(CLI::IsMember({"default", "adversarial"}));
  evaluate_cmd->add_option("--group-by", ev.group_by, "Attribute key to group by (repeatable)");

  RankArgs rk;
  auto* rank_cmd = app.add_subcommand("rank", "Order report files by tpAUC, pAUC, AUC, AP");
  rank_cmd->add_option("--input,-i", rk.inputs, "Report JSONL file (repeatable)")->required();
  rank_cmd->add_option("--output,-o", rk.output);
  rank_cmd->add_option("--format", rk.format)->check(CLI::IsMember({"json", "csv"}));

  ThresholdArgs th;
  auto* threshold_cmd = app.add_subcommand("threshold", "Select decision thresholds on a dev score set");
  threshold_cmd->add_option("--input,-i", th.input);
  threshold_cmd->add_option("--output,-o", th.output);
  threshold_cmd->add_option("--input-format", th.input_format)->check(CLI::IsMember({"auto", "jsonl", "csv"}));
  threshold_cmd->add_option("--fixed", th.fixed, "Fixed raw threshold (repeatable)");
  threshold_cmd->add_option("--max-fpr", th.max_fpr, "TPR@FPR target (repeatable)");
  threshold_cmd->add_option("--min-precision", th.min_precision, "Recall@precision target (repeatable)");

  DeployArgs dp;
  auto* deploy_cmd = app.add_subcommand("deploy", "Apply chosen thresholds to a deployment score set");
  deploy_cmd->add_option("--choices,-c", dp.choices, "Threshold choices JSON")->required();
  deploy_cmd->add_option("--input,-i", dp.input);
  deploy_cmd->add_option("--output,-o", dp.output);
  deploy_cmd->add_option("--input-format", dp.input_format)->check(CLI::IsMember({"auto", "jsonl", "csv"}));

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train-dxo", "Train a scorer on the KL-DRO pAUC/tpAUC objective");
  train_cmd->add_option("--input,-i", tr.input, "Feature CSV (id,label,f0,...)")->required();
  train_cmd->add_option("--validation", tr.validation, "Validation feature CSV");
  train_cmd->add_option("--output,-o", tr.output);
  train_cmd->add_option("--config", tr.config, "key=value training config");
  train_cmd->add_option("--init", tr.init, "Initial scorer JSON (warm start)");
  train_cmd->add_option("--scorer", tr.scorer)->check(CLI::IsMember({"linear", "mlp1"}));
  train_cmd->add_option("--hidden", tr.hidden, "Hidden units for mlp1");
  train_cmd->add_option("--mode", tr.mode)->check(CLI::IsMember({"full_batch", "mini_batch", "full", "mini"}));
  train_cmd->add_option("--objective", tr.objective)->check(CLI::IsMember({"pauc_kl", "tpauc_kl", "pauc", "tpauc"}));
  train_cmd->add_option("--lambda", tr.cfg.lambda);
  train_cmd->add_option("--lambda-prime", tr.cfg.lambda_prime);
  train_cmd->add_option("--margin", tr.cfg.margin);
  train_cmd->add_option("--lr", tr.cfg.learning_rate);
  train_cmd->add_option("--epochs", tr.cfg.epochs);
  train_cmd->add_option("--batch-size", tr.cfg.batch_size);
  train_cmd->add_option("--sampling-rate", tr.cfg.sampling_rate);
  train_cmd->add_option("--gamma", tr.cfg.ma_gamma, "Moving-average rate");
  train_cmd->add_option("--seed", tr.cfg.seed);
  train_cmd->add_option("--alpha", tr.cfg.eval_params.alpha, "Validation tpAUC min TPR");
  train_cmd->add_option("--beta", tr.cfg.eval_params.beta, "Validation tpAUC max FPR");

  BinocularsArgs bn;
  auto* binoculars_cmd = app.add_subcommand("binoculars", "Binoculars scores from token-probability records");
  binoculars_cmd->add_option("--input,-i", bn.input);
  binoculars_cmd->add_option("--output,-o", bn.output);

  QualityArgs ql;
  auto* quality_cmd = app.add_subcommand("quality", "Heuristic and repetition screening of {id,text} JSONL");
  quality_cmd->add_option("--input,-i", ql.input);
  quality_cmd->add_option("--output,-o", ql.output);

  MixcaseArgs mx;
  auto* mixcase_cmd = app.add_subcommand("mixcase-plan", "Sample T, H, N from observed token lengths");
  mixcase_cmd->add_option("--input,-i", mx.input, "One token count per line");
  mixcase_cmd->add_option("--output,-o", mx.output);
  mixcase_cmd->add_option("--seed", mx.seed);
  mixcase_cmd->add_option("--draws", mx.draws)->check(CLI::PositiveNumber);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    io.out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    io.err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*evaluate_cmd) cmd_evaluate(ev, resolve_params(ev, *evaluate_cmd), io);
    else if (*rank_cmd) cmd_rank(rk, io);
    else if (*threshold_cmd) cmd_threshold(th, io);
    else if (*deploy_cmd) cmd_deploy(dp, io);
    else if (*train_cmd) cmd_train(tr, *train_cmd, io);
    else if (*binoculars_cmd) cmd_binoculars(bn, io);
    else if (*quality_cmd) cmd_quality(ql, io);
    else if (*mixcase_cmd) cmd_mixcase(mx, io);
  } catch (const Error& e) {
    io.err << "error: " << e.what() << '\n';
    return kData;
  }
  return kOk;
}

}  // namespace xrisk::cli
