// qnk command-line entry point.

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "qnk/acceptance.hpp"
#include "qnk/consistency.hpp"
#include "qnk/error.hpp"
#include "qnk/fieldio.hpp"
#include "qnk/fields.hpp"
#include "qnk/meshbias.hpp"
#include "qnk/normalize.hpp"
#include "qnk/opsim.hpp"
#include "qnk/quadrature.hpp"
#include "qnk/resample.hpp"
#include "qnk/statkit.hpp"
#include "qnk/stats.hpp"

using json = nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

// Recorded in every config line that involves resampling.
constexpr const char* kInterpBoundary = "cubic-exact ghost nodes; periodic wrap";

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  /// Extra lines emitted as "# key,value" comments (CSV) or a "summary" object (JSON).
  std::vector<std::pair<std::string, std::string>> summary;
  bool header = true;
};

struct Global {
  std::uint64_t seed = 7;
  std::string output;
  std::string format = "csv";
};

void emit(const Global& g, const json& config, const Table& t) {
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!g.output.empty()) {
    file.open(g.output, std::ios::binary);
    if (!file) throw qnk::Error("cannot open '" + g.output + "' for writing");
    os = &file;
  }
  if (g.format == "json") {
    json out;
    out["config"] = config;
    out["columns"] = t.columns;
    out["rows"] = t.rows;
    json s = json::object();
    for (const auto& [k, v] : t.summary) s[k] = v;
    out["summary"] = s;
    *os << out.dump(2) << '\n';
    return;
  }
  *os << "# config " << config.dump() << '\n';
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) *os << (i ? "," : "") << cells[i];
    *os << '\n';
  };
  if (t.header && !t.columns.empty()) line(t.columns);
  for (const auto& r : t.rows) line(r);
  for (const auto& [k, v] : t.summary) *os << "# " << k << ',' << v << '\n';
}

// Grid options shared by several subcommands.
struct GridOpts {
  std::vector<std::size_t> n{33};
  std::string kind = "uniform";
  double strength = 2.0;
  std::vector<double> coords;

  void add(CLI::App* app) {
    app->add_option("--n", n, "Nodes per axis, comma separated")->delimiter(',');
    app->add_option("--grid", kind, "uniform | periodic | boundary_refined | chebyshev | custom")
        ->check(CLI::IsMember({"uniform", "periodic", "boundary_refined", "chebyshev", "custom"}));
    app->add_option("--strength", strength, "Stretching strength for boundary_refined");
    app->add_option("--coords", coords, "Coordinates for a custom 1D axis")->delimiter(',');
  }

  qnk::GridSpec build() const {
    if (kind == "uniform") return qnk::uniform_grid(n);
    if (kind == "periodic") return qnk::periodic_grid(n);
    std::vector<qnk::Axis1D> axes;
    if (kind == "custom") {
      axes.push_back(qnk::nonuniform_axis(qnk::CustomCoords{coords}, 0));
    } else {
      for (std::size_t v : n) {
        axes.push_back(kind == "chebyshev" ? qnk::nonuniform_axis(qnk::Chebyshev{}, v)
                                           : qnk::nonuniform_axis(qnk::BoundaryRefined{strength}, v));
      }
    }
    return qnk::GridSpec(std::move(axes));
  }

  json to_json() const {
    json j;
    j["grid"] = kind;
    j["n"] = n;
    if (kind == "boundary_refined") j["strength"] = strength;
    if (kind == "custom") j["coords"] = coords;
    return j;
  }
};

// A field either read from a file or sampled from the registry.
struct InputOpts {
  std::string input;
  std::string field = "mixed2d";
  double constant = 1.0;
  std::size_t channels = 1;
  GridOpts grid;

  void add(CLI::App* app) {
    app->add_option("--input", input, "Field file to read (otherwise sample --field)");
    app->add_option("--field", field, "Analytic field id");
    app->add_option("--constant", constant, "Value of the constant field");
    app->add_option("--channels", channels, "Channels when sampling")->check(CLI::PositiveNumber);
    grid.add(app);
  }

  qnk::FieldTensor load() const {
    if (!input.empty()) return qnk::read_field_file(input);
    return qnk::sample_field({qnk::parse_field_id(field), constant}, grid.build(), channels);
  }

  json to_json() const {
    json j;
    if (!input.empty()) {
      j["input"] = input;
    } else {
      j["field"] = field;
      if (field == "constant") j["constant"] = constant;
      j["channels"] = channels;
      j.update(grid.to_json());
    }
    return j;
  }
};

struct NormOpts {
  std::string method = "quadnorm";
  std::string mode = "layer";
  double alpha = 0.3;
  std::size_t groups = 8;
  double epsilon = 1e-5;

  void add(CLI::App* app) {
    app->add_option("--method", method, "none | layernorm | instancenorm | groupnorm | rmsnorm | quadnorm | blendquadnorm");
    app->add_option("--mode", mode, "quadnorm reduction: instance | layer | group:G");
    app->add_option("--alpha", alpha, "blendquadnorm weight of the uniform statistics")->check(CLI::Range(0.0, 1.0));
    app->add_option("--groups", groups, "groupnorm group count")->check(CLI::PositiveNumber);
    app->add_option("--epsilon", epsilon, "variance stabilizer")->check(CLI::NonNegativeNumber);
  }

  qnk::NormSpec build() const {
    qnk::NormSpec s;
    s.method = qnk::parse_norm_method(method);
    s.quad_mode = qnk::parse_pattern(mode);
    s.alpha = alpha;
    s.groups = groups;
    s.epsilon = epsilon;
    return s;
  }

  json to_json() const {
    return json{{"method", method}, {"mode", mode}, {"alpha", alpha}, {"groups", groups}, {"epsilon", epsilon}};
  }
};

json base_config(const Global& g, const std::string& command) {
  json j;
  j["command"] = command;
  j["seed"] = g.seed;
  j["format"] = g.format;
  return j;
}

std::vector<qnk::NormSpec> parse_methods(const std::vector<std::string>& names) {
  std::vector<qnk::NormSpec> out;
  for (const auto& n : names) {
    if (n.rfind("quadnorm", 0) == 0 && n.size() > 8 && n[8] == ':') {
      out.push_back(qnk::NormSpec::quadnorm(qnk::parse_pattern(n.substr(9))));
    } else if (n.rfind("blendquadnorm", 0) == 0 && n.size() > 13 && n[13] == ':') {
      out.push_back(qnk::NormSpec::blend(std::stod(n.substr(14))));
    } else {
      out.push_back(qnk::NormSpec::with(qnk::parse_norm_method(n)));
    }
  }
  return out;
}

std::map<std::string, double> read_seed_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw qnk::Error("cannot open '" + path + "'");
  std::map<std::string, double> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw qnk::DomainError("expected 'seed,error' rows in " + path);
    const std::string key = line.substr(0, comma);
    try {
      out[key] = std::stod(line.substr(comma + 1));
    } catch (const std::exception&) {
      if (out.empty()) continue;  // header row
      throw qnk::DomainError("bad value in " + path + ": " + line);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quadrature-weighted normalization toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI file with option values");
  Global g;
  app.add_option("--seed", g.seed, "Seed for every random draw");
  app.add_option("-o,--output", g.output, "Write the table here instead of stdout");
  app.add_option("--format", g.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));

  std::function<int()> action;

  // weights
  auto* weights = app.add_subcommand("weights", "Print a quadrature weight field");
  GridOpts w_grid;
  w_grid.add(weights);
  std::string w_rule = "trapezoid";
  weights->add_option("--rule", w_rule, "uniform | trapezoid | simpson | boole | control_volume");
  weights->callback([&] {
    action = [&] {
      const auto grid = w_grid.build();
      const auto wf = qnk::weight_field(grid, qnk::parse_weight_rule(w_rule));
      json cfg = base_config(g, "weights");
      cfg.update(w_grid.to_json());
      cfg["rule"] = w_rule;
      Table t;
      t.header = false;
      const std::size_t last = grid.axes().back().size();
      for (std::size_t i = 0; i < wf.weights.size(); i += last) {
        std::vector<std::string> row;
        for (std::size_t j = 0; j < last; ++j) row.push_back(num(wf.weights[i + j]));
        t.rows.push_back(row);
      }
      t.summary.emplace_back("total", num(wf.total()));
      emit(g, cfg, t);
      return kExitOk;
    };
  });

  // moments
  auto* moments = app.add_subcommand("moments", "Uniform, weighted or blended moments of a field");
  InputOpts m_in;
  m_in.add(moments);
  std::string m_rule = "trapezoid";
  std::string m_pattern = "layer";
  double m_alpha = -1.0;
  moments->add_option("--rule", m_rule, "uniform | trapezoid | simpson | boole | control_volume | quadrature");
  moments->add_option("--pattern", m_pattern, "instance | layer | group:G");
  moments->add_option("--alpha", m_alpha, "Blend with uniform statistics at this weight (layer pattern)");
  moments->callback([&] {
    action = [&] {
      const auto x = m_in.load();
      const auto pattern = qnk::parse_pattern(m_pattern);
      qnk::Moments m;
      if (m_rule == "quadrature") {
        m = qnk::weighted_moments(x, qnk::quadrature_weight_field(x.grid()), pattern);
      } else {
        m = qnk::rule_moments(x, qnk::parse_weight_rule(m_rule), pattern);
      }
      if (m_alpha >= 0.0) m = qnk::blend_moments(qnk::uniform_moments(x, pattern), m, m_alpha);
      json cfg = base_config(g, "moments");
      cfg.update(m_in.to_json());
      cfg["rule"] = m_rule;
      cfg["pattern"] = pattern.name();
      if (m_alpha >= 0.0) cfg["alpha"] = m_alpha;
      Table t;
      t.columns = {"batch", "slice", "mean", "variance"};
      for (std::size_t b = 0; b < m.batch; ++b) {
        for (std::size_t s = 0; s < m.slices; ++s) {
          t.rows.push_back({std::to_string(b), std::to_string(s), num(m.mean_at(b, s)), num(m.var_at(b, s))});
        }
      }
      emit(g, cfg, t);
      return kExitOk;
    };
  });

  // normalize
  auto* normalize = app.add_subcommand("normalize", "Apply a normalization and write the result");
  InputOpts n_in;
  n_in.add(normalize);
  NormOpts n_norm;
  n_norm.add(normalize);
  std::string n_out;
  normalize->add_option("--out", n_out, "Field file for the normalized output")->required();
  normalize->callback([&] {
    action = [&] {
      const auto x = n_in.load();
      const auto y = qnk::apply_norm(x, n_norm.build());
      qnk::write_field_file(n_out, y);
      json cfg = base_config(g, "normalize");
      cfg.update(n_in.to_json());
      cfg.update(n_norm.to_json());
      cfg["out"] = n_out;
      const auto wm = qnk::weighted_moments(y, qnk::quadrature_weight_field(y.grid()), qnk::ReductionPattern::instance());
      const auto um = qnk::uniform_moments(y, qnk::ReductionPattern::instance());
      Table t;
      t.columns = {"batch", "channel", "uniform_mean", "uniform_variance", "weighted_mean", "weighted_variance"};
      for (std::size_t b = 0; b < y.batch(); ++b) {
        for (std::size_t c = 0; c < y.channels(); ++c) {
          t.rows.push_back({std::to_string(b), std::to_string(c), num(um.mean_at(b, c)), num(um.var_at(b, c)),
                            num(wm.mean_at(b, c)), num(wm.var_at(b, c))});
        }
      }
      emit(g, cfg, t);
      return kExitOk;
    };
  });

  // resample
  auto* resample = app.add_subcommand("resample", "Interpolate a field onto another grid");
  InputOpts r_in;
  r_in.add(resample);
  std::vector<std::size_t> r_target;
  std::string r_method = "bicubic";
  std::string r_out;
  resample->add_option("--target", r_target, "Target nodes per axis")->delimiter(',')->required();
  resample->add_option("--interp", r_method, "bilinear | bicubic");
  resample->add_option("--out", r_out, "Field file for the resampled output")->required();
  resample->callback([&] {
    action = [&] {
      const auto x = r_in.load();
      const bool periodic = x.grid().all_of_kind(qnk::AxisKind::periodic);
      const auto target = periodic ? qnk::periodic_grid(r_target) : qnk::uniform_grid(r_target);
      const auto y = qnk::interpolate(x, target, qnk::parse_interp_method(r_method));
      qnk::write_field_file(r_out, y);
      json cfg = base_config(g, "resample");
      cfg.update(r_in.to_json());
      cfg["target"] = r_target;
      cfg["interp"] = r_method;
      cfg["interp_boundary"] = kInterpBoundary;
      cfg["out"] = r_out;
      Table t;
      t.columns = {"batch", "channel", "min", "max"};
      for (std::size_t b = 0; b < y.batch(); ++b) {
        for (std::size_t c = 0; c < y.channels(); ++c) {
          const auto s = y.slice(b, c);
          const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
          t.rows.push_back({std::to_string(b), std::to_string(c), num(*lo), num(*hi)});
        }
      }
      emit(g, cfg, t);
      return kExitOk;
    };
  });

  // consistency
  auto* consistency = app.add_subcommand("consistency", "Cross-resolution mismatch ladder and fitted order");
  std::string c_field = "quadratic1d";
  std::string c_rule = "trapezoid";
  std::string c_pattern = "layer";
  std::string c_quantity = "mean";
  std::string c_interp = "bicubic";
  std::vector<std::size_t> c_ladder{17, 33, 65, 129, 257};
  std::size_t c_dim = 0;
  std::size_t c_channels = 1;
  NormOpts c_norm;
  consistency->add_option("--field", c_field, "Analytic field id");
  consistency->add_option("--rule", c_rule, "Weight rule for statistic ladders");
  consistency->add_option("--pattern", c_pattern, "instance | layer | group:G");
  consistency->add_option("--quantity", c_quantity, "mean | variance | output")
      ->check(CLI::IsMember({"mean", "variance", "output"}));
  consistency->add_option("--ladder", c_ladder, "Grid sizes, strictly increasing")->delimiter(',');
  consistency->add_option("--dim", c_dim, "Spatial dimension (default: the field's own, else 2)");
  consistency->add_option("--channels", c_channels, "Channels sampled")->check(CLI::PositiveNumber);
  consistency->add_option("--interp", c_interp, "bilinear | bicubic (output quantity)");
  c_norm.add(consistency);
  consistency->callback([&] {
    action = [&] {
      const qnk::FieldSpec f{qnk::parse_field_id(c_field), 1.0};
      const std::size_t dim = c_dim ? c_dim : qnk::required_dim(f.id).value_or(2);
      qnk::ConsistencyReport rep;
      json cfg = base_config(g, "consistency");
      cfg["field"] = c_field;
      cfg["quantity"] = c_quantity;
      cfg["ladder"] = c_ladder;
      cfg["dim"] = dim;
      cfg["channels"] = c_channels;
      if (c_quantity == "output") {
        rep = qnk::output_ladder(f, c_norm.build(), c_ladder, dim, qnk::parse_interp_method(c_interp), c_channels);
        cfg["norm"] = c_norm.to_json();
        cfg["interp"] = c_interp;
        cfg["interp_boundary"] = kInterpBoundary;
      } else {
        rep = qnk::statistic_ladder(f, c_ladder, dim, qnk::parse_weight_rule(c_rule), qnk::parse_pattern(c_pattern),
                                    c_quantity == "mean" ? qnk::Statistic::mean : qnk::Statistic::variance, c_channels);
        cfg["rule"] = c_rule;
        cfg["pattern"] = c_pattern;
      }
      Table t;
      t.columns = {"kind", "rung", "n", "h", "n_prime", "h_prime", "value", "field", "rule", "pattern"};
      for (std::size_t i = 0; i < rep.rungs.size(); ++i) {
        const auto& r = rep.rungs[i];
        t.rows.push_back({"rung", std::to_string(i), std::to_string(r.n), num(r.h), std::to_string(r.n_prime),
                          num(r.h_prime), num(r.mismatch), rep.field, rep.rule, rep.pattern});
      }
      t.rows.push_back({"fitted_order", "", "", "", "", "", num(rep.fitted_order), rep.field, rep.rule, rep.pattern});
      emit(g, cfg, t);
      return kExitOk;
    };
  });

  // opsim gap / depth
  auto* opsim = app.add_subcommand("opsim", "Frozen operator-stack transfer experiments");
  opsim->require_subcommand(1);
  opsim->fallthrough();
  qnk::ExperimentConfig o_cfg;
  std::vector<std::string> o_methods{"layernorm", "quadnorm"};
  std::string o_field = "mixed2d";
  std::string o_interp = "bicubic";
  std::string o_act = "gelu";
  bool o_no_gain = false;
  double o_alpha0 = 0.5;
  auto add_stack_opts = [&](CLI::App* sub) {
    sub->add_option("--width", o_cfg.stack.width, "Channel width")->check(CLI::PositiveNumber);
    sub->add_option("--modes", o_cfg.stack.modes, "Cosine modes per axis")->check(CLI::PositiveNumber);
    sub->add_option("--ensemble", o_cfg.ensemble, "Stacks averaged per point")->check(CLI::PositiveNumber);
    sub->add_option("--methods", o_methods, "Norm methods, e.g. layernorm,quadnorm,none")->delimiter(',');
    sub->add_option("--field", o_field, "Input field id");
    sub->add_option("--interp", o_interp, "bilinear | bicubic");
    sub->add_option("--activation", o_act, "gelu | tanh | identity");
    sub->add_option("--alpha0", o_alpha0, "Residual gain strength");
    sub->add_flag("--no-gain", o_no_gain, "Replace the hidden state in each block instead of adding to it");
  };
  auto finish_cfg = [&](json& cfg) {
    o_cfg.stack.seed = g.seed;
    o_cfg.methods = parse_methods(o_methods);
    o_cfg.field = {qnk::parse_field_id(o_field), 1.0};
    o_cfg.interp = qnk::parse_interp_method(o_interp);
    o_cfg.stack.activation = qnk::parse_activation(o_act);
    o_cfg.stack.dim = qnk::required_dim(o_cfg.field.id).value_or(2);
    if (o_no_gain) {
      o_cfg.stack.residual_gain.reset();
    } else {
      o_cfg.stack.residual_gain = qnk::GainSpec{o_alpha0, 1e-5};
    }
    cfg["width"] = o_cfg.stack.width;
    cfg["modes"] = o_cfg.stack.modes;
    cfg["ensemble"] = o_cfg.ensemble;
    cfg["methods"] = o_methods;
    cfg["field"] = o_field;
    cfg["interp"] = o_interp;
    cfg["interp_boundary"] = kInterpBoundary;
    cfg["activation"] = o_act;
    cfg["residual_gain"] = o_no_gain ? json(nullptr) : json{{"alpha0", o_alpha0}, {"epsilon", 1e-5}};
  };
  auto scaling_table = [&](const qnk::ScalingReport& rep, const char* fit_name) {
    Table t;
    t.columns = {"method", "L", "r", "h", "h_prime", "discrepancy"};
    for (const auto& r : rep.rows) {
      t.rows.push_back({r.method, std::to_string(r.depth), num(r.ratio), num(r.h), num(r.h_prime), num(r.discrepancy)});
    }
    for (const auto& f : rep.fits) {
      t.summary.emplace_back(std::string(fit_name) + ":" + f.method, num(f.slope));
      t.summary.emplace_back("intercept:" + f.method, num(f.intercept));
    }
    return t;
  };

  auto* gap = opsim->add_subcommand("gap", "Discrepancy against the resolution ratio");
  std::size_t gap_source = 33;
  std::vector<std::size_t> gap_targets{33, 65, 129, 257};
  std::size_t gap_depth = 4;
  gap->add_option("--source", gap_source, "Source grid size");
  gap->add_option("--targets", gap_targets, "Target grid sizes refining the source")->delimiter(',');
  gap->add_option("--depth", gap_depth, "Blocks in the stack")->check(CLI::PositiveNumber);
  add_stack_opts(gap);
  gap->callback([&] {
    action = [&] {
      json cfg = base_config(g, "opsim gap");
      o_cfg.stack.depth = gap_depth;
      finish_cfg(cfg);
      cfg["depth"] = gap_depth;
      cfg["source"] = gap_source;
      cfg["targets"] = gap_targets;
      emit(g, cfg, scaling_table(qnk::gap_scaling_experiment(o_cfg, gap_source, gap_targets), "slope"));
      return kExitOk;
    };
  });

  auto* depth = opsim->add_subcommand("depth", "Discrepancy against depth");
  std::vector<std::size_t> depth_list{1, 2, 4, 8};
  std::size_t depth_n = 33;
  std::size_t depth_np = 129;
  depth->add_option("--depths", depth_list, "Depths to evaluate")->delimiter(',');
  depth->add_option("--n", depth_n, "Grid size h");
  depth->add_option("--n-prime", depth_np, "Grid size h'");
  add_stack_opts(depth);
  depth->callback([&] {
    action = [&] {
      json cfg = base_config(g, "opsim depth");
      finish_cfg(cfg);
      cfg["depths"] = depth_list;
      cfg["n"] = depth_n;
      cfg["n_prime"] = depth_np;
      emit(g, cfg, scaling_table(qnk::depth_scaling_experiment(o_cfg, depth_list, depth_n, depth_np), "exponent"));
      return kExitOk;
    };
  });

  // meshbias
  auto* meshbias = app.add_subcommand("meshbias", "Uniform vs control-volume mean bias on stretched meshes");
  std::string b_field = "bump2d";
  std::string b_family = "boundary_refined";
  std::vector<double> b_strengths{0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  std::size_t b_n = 64;
  meshbias->add_option("--field", b_field, "Analytic field id");
  meshbias->add_option("--family", b_family, "boundary_refined | chebyshev")
      ->check(CLI::IsMember({"boundary_refined", "chebyshev"}));
  meshbias->add_option("--strengths", b_strengths, "Stretching strengths")->delimiter(',');
  meshbias->add_option("--n", b_n, "Nodes per axis")->check(CLI::Range(3, 1 << 14));
  meshbias->callback([&] {
    action = [&] {
      const auto fam = b_family == "chebyshev" ? qnk::MeshFamily::chebyshev : qnk::MeshFamily::boundary_refined;
      const auto reps = qnk::bias_sweep({qnk::parse_field_id(b_field), 1.0}, fam, b_strengths, b_n);
      json cfg = base_config(g, "meshbias");
      cfg["field"] = b_field;
      cfg["family"] = b_family;
      cfg["strengths"] = b_strengths;
      cfg["n"] = b_n;
      cfg["ratio_definition"] = "max/min 1D cell width";
      Table t;
      t.columns = {"ratio", "uniform_bias", "weighted_bias", "reduction", "strength", "n", "reference",
                   "uniform_estimate", "weighted_estimate"};
      for (const auto& r : reps) {
        t.rows.push_back({num(r.nonuniformity_ratio), num(r.uniform_bias), num(r.weighted_bias),
                          num(r.reduction_factor), num(r.strength), std::to_string(r.n), num(r.reference_mean),
                          num(r.uniform_estimate), num(r.weighted_estimate)});
      }
      emit(g, cfg, t);
      return kExitOk;
    };
  });

  // stats
  auto* stats = app.add_subcommand("stats", "Bootstrap, TOST, effect size and paired t-tests against a baseline");
  std::string s_base;
  std::vector<std::string> s_methods;
  double s_margin = 0.5;
  std::size_t s_resamples = 10000;
  double s_conf = 0.95;
  double s_alpha = 0.05;
  stats->add_option("--baseline", s_base, "CSV of (seed, error) rows for the baseline")->required();
  stats->add_option("--method", s_methods, "CSV of (seed, error) rows; repeatable")->required();
  stats->add_option("--margin", s_margin, "TOST equivalence margin")->check(CLI::PositiveNumber);
  stats->add_option("--resamples", s_resamples, "Bootstrap resamples")->check(CLI::PositiveNumber);
  stats->add_option("--confidence", s_conf, "Bootstrap confidence level")->check(CLI::Range(0.5, 0.9999));
  stats->add_option("--alpha", s_alpha, "Family-wise level for Holm")->check(CLI::Range(0.0, 1.0));
  stats->callback([&] {
    action = [&] {
      const auto base = read_seed_csv(s_base);
      json cfg = base_config(g, "stats");
      cfg["baseline"] = s_base;
      cfg["methods"] = s_methods;
      cfg["margin"] = s_margin;
      cfg["resamples"] = s_resamples;
      cfg["confidence"] = s_conf;
      cfg["alpha"] = s_alpha;
      cfg["bootstrap"] = "percentile";
      Table t;
      t.columns = {"method",  "n",       "improvement", "ci_lo",    "ci_hi",    "tost_mean_diff", "tost_ci90_lo",
                   "tost_ci90_hi", "tost_p", "equivalent", "cohens_d", "t",        "p",              "holm_reject"};
      std::vector<double> pvals;
      for (std::size_t k = 0; k < s_methods.size(); ++k) {
        const auto m = read_seed_csv(s_methods[k]);
        qnk::PairedSamples s;
        for (const auto& [seed, v] : base) {
          if (auto it = m.find(seed); it != m.end()) {
            s.a.push_back(v);
            s.b.push_back(it->second);
          }
        }
        const auto boot = qnk::bootstrap_improvement_ci(s, s_resamples, s_conf, qnk::derive_seed(g.seed, k));
        const auto tost = qnk::tost_equivalence(s, s_margin);
        const auto d = qnk::cohens_d(s);
        const auto tt = qnk::paired_t_test(s);
        pvals.push_back(tt.p_two_sided);
        t.rows.push_back({s_methods[k], std::to_string(s.size()), num(boot.improvement), num(boot.lo), num(boot.hi),
                          num(tost.mean_diff), num(tost.ci_lo), num(tost.ci_hi), num(tost.p_value),
                          tost.equivalent ? "1" : "0", num(d.d) + (d.degenerate ? "*" : ""), num(tt.t),
                          num(tt.p_two_sided), ""});
      }
      const auto rej = qnk::holm_bonferroni(pvals, s_alpha);
      for (std::size_t k = 0; k < rej.size(); ++k) t.rows[k].back() = rej[k] ? "1" : "0";
      emit(g, cfg, t);
      return kExitOk;
    };
  });

  // verify-all
  auto* verify = app.add_subcommand("verify-all", "Run the acceptance suite");
  std::string v_dir = "verify_out";
  std::vector<int> v_only;
  verify->add_option("--output-dir", v_dir, "Directory for per-criterion CSV artifacts");
  verify->add_option("--only", v_only, "Run only these criteria")->delimiter(',');
  verify->callback([&] {
    action = [&] {
      json cfg = base_config(g, "verify-all");
      cfg["output_dir"] = v_dir;
      cfg["only"] = v_only;
      qnk::AcceptanceOptions opts;
      opts.seed = g.seed;
      opts.output_dir = v_dir;
      opts.only = std::set<int>(v_only.begin(), v_only.end());
      std::cout << "# config " << cfg.dump() << std::endl;
      const auto rep = qnk::run_acceptance(opts);
      for (const auto& r : rep.results) std::cout << qnk::format_result_line(r) << '\n';
      std::size_t passed = 0;
      for (const auto& r : rep.results) passed += r.pass() ? 1 : 0;
      std::cout << (rep.all_pass() ? "ALL PASS" : "FAILURES") << " (" << passed << "/" << rep.results.size() << ")"
                << std::endl;
      return rep.all_pass() ? kExitOk : kExitFail;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const qnk::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFail;
  }
}
