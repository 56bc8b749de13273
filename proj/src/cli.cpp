#include "affthermo/cli.hpp"

#include "affthermo/classify.hpp"
#include "affthermo/cloud_io.hpp"
#include "affthermo/document.hpp"
#include "affthermo/errors.hpp"
#include "affthermo/format.hpp"
#include "affthermo/geometry.hpp"
#include "affthermo/pressure.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

namespace affthermo::cli {

namespace {

struct Common {
  std::string input;
  std::string output;  // empty: stdout
  std::optional<std::uint64_t> budget;
};

struct Loaded {
  AffineIFS ifs;
  IfsDocument doc;
  std::uint64_t budget = 0;
};

Loaded load(const Common& c) {
  Loaded l;
  l.doc = IfsDocument::load(c.input);
  l.ifs = l.doc.to_ifs();
  l.budget = c.budget ? *c.budget : l.doc.options.budget.value_or(default_node_budget());
  return l;
}

SubshiftKind kind_of(const std::string& text) {
  auto k = parse_subshift_kind(text);
  if (!k) throw PreconditionError("cli", "UnknownKind", "kind must be full, sigma or invertible, got " + text);
  return *k;
}

// Writes to --out when given, else to the console stream.
void emit(const Common& c, std::ostream& out, const std::function<void(std::ostream&)>& body) {
  if (c.output.empty()) {
    body(out);
    return;
  }
  std::ofstream file(c.output, std::ios::binary);
  if (!file) throw Error(ErrorCategory::Io, "cli", "OpenFailed", "cannot write " + c.output);
  body(file);
}

/// "3:8" for 2^-3 .. 2^-8, or a comma list of box sizes.
std::vector<double> parse_scales(const std::string& text) {
  try {
    if (auto colon = text.find(':'); colon != std::string::npos) {
      return dyadic_scales(std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1)));
    }
    std::vector<double> scales;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) scales.push_back(std::stod(item));
    return scales;
  } catch (const std::logic_error&) {
    throw PreconditionError("cli", "DomainError", "scales must look like 3:8 or 0.125,0.0625, got " + text);
  }
}

bool is_document(const std::string& path) {
  return path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
}

void print_affdim(std::ostream& out, const AffinityDimension& d) {
  out << "kind: " << to_string(d.kind) << "\nlo: " << format_number(d.lo) << "\nhi: " << format_number(d.hi)
      << "\nmid: " << format_number(0.5 * (d.lo + d.hi)) << "\ndepth: " << d.depth << '\n';
}

void print_box(std::ostream& out, const BoxDimEstimate& b) {
  out << "slope: " << format_number(b.slope) << "\nstderr: " << format_number(b.stderr_) << '\n';
  for (std::size_t i = 0; i < b.scales.size(); ++i) {
    out << "scale " << format_number(b.scales[i]) << ": " << format_number(b.counts[i]) << '\n';
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Thermodynamic and dimension analysis of planar affine iterated function systems", "affthermo"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "worker thread cap (default 1)");

  Common common;
  auto add_common = [&](CLI::App* sub, bool needs_output) {
    sub->add_option("input", common.input, "IFS document (.json)")->required();
    if (needs_output) sub->add_option("--out,-o", common.output, "output file (default stdout)");
    sub->add_option("--budget", common.budget, "tree node budget");
  };

  std::function<void()> action;
  int status = kExitOk;

  auto* analyze = app.add_subcommand("analyze", "classification report");
  add_common(analyze, true);
  analyze->callback([&] {
    action = [&] {
      const auto l = load(common);
      ClassifyConfig config;
      config.node_budget = l.budget;
      const auto report = format_report(classify(l.ifs, config), l.ifs);
      emit(common, out, [&](std::ostream& o) { o << report; });
    };
  });

  std::string kind_text = "full";
  double s_from = 0.0, s_to = 2.0;
  int steps = 21, depth = 8;
  auto* curve = app.add_subcommand("pressure-curve", "CSV of certified pressure bounds");
  add_common(curve, true);
  curve->add_option("--kind", kind_text, "full | sigma | invertible | auto");
  curve->add_option("--s-from", s_from);
  curve->add_option("--s-to", s_to);
  curve->add_option("--steps", steps)->check(CLI::PositiveNumber);
  curve->add_option("--depth", depth)->check(CLI::PositiveNumber);
  curve->callback([&] {
    action = [&] {
      const auto l = load(common);
      PressureOptions opts;
      opts.node_budget = l.budget;
      std::vector<PressureEstimate> rows;
      const bool automatic = kind_text == "auto";
      const SubshiftKind kind = automatic ? SubshiftKind::Full : kind_of(kind_text);
      try {
        for (int i = 0; i < steps; ++i) {
          const double s = steps == 1 ? s_from : s_from + (s_to - s_from) * i / (steps - 1);
          rows.push_back(automatic ? pressure_dispatch(l.ifs, s, depth, opts)
                                   : pressure_estimate(l.ifs, kind, s, depth, opts));
        }
      } catch (const BudgetExceeded&) {
        emit(common, out, [&](std::ostream& o) { write_pressure_csv(o, rows); });
        throw;
      }
      emit(common, out, [&](std::ostream& o) { write_pressure_csv(o, rows); });
    };
  });

  double tol = 1e-3;
  int max_depth = 24;
  auto* affdim = app.add_subcommand("affdim", "affinity dimension bracket");
  add_common(affdim, true);
  affdim->add_option("--kind", kind_text, "full | sigma | invertible");
  affdim->add_option("--tol", tol)->check(CLI::PositiveNumber);
  affdim->add_option("--max-depth", max_depth)->check(CLI::PositiveNumber);
  affdim->callback([&] {
    action = [&] {
      const auto l = load(common);
      AffinityOptions opts;
      opts.max_depth = max_depth;
      opts.pressure.node_budget = l.budget;
      try {
        const auto d = affinity_dimension(l.ifs, kind_of(kind_text), tol, opts);
        emit(common, out, [&](std::ostream& o) { print_affdim(o, d); });
      } catch (const InconclusiveBracket& e) {
        emit(common, out, [&](std::ostream& o) { print_affdim(o, e.best()); });
        throw;
      }
    };
  });

  double s_value = 1.0;
  int gap_depth = 14;
  auto* gap = app.add_subcommand("gap", "certified gap between the full and invertible pressures");
  add_common(gap, true);
  gap->add_option("--s", s_value);
  gap->add_option("--max-depth", gap_depth)->check(CLI::PositiveNumber);
  gap->callback([&] {
    action = [&] {
      const auto l = load(common);
      GapOptions opts;
      opts.max_depth = gap_depth;
      opts.pressure.node_budget = l.budget;
      const auto g = pressure_gap(l.ifs, s_value, opts);
      emit(common, out, [&](std::ostream& o) {
        o << "status: " << (g.status == PressureGap::Status::CertifiedGap ? "CertifiedGap" : "Inconclusive")
          << "\ns: " << format_number(s_value) << "\nlowerFull: " << format_number(g.lower_full)
          << "\nupperInv: " << format_number(g.upper_inv) << "\ndepth: " << g.depth
          << "\nfullCertificate: " << describe(g.full.certificate) << '\n';
      });
      if (g.status != PressureGap::Status::CertifiedGap) status = kExitBudget;
    };
  });

  double epsilon = std::ldexp(1.0, -8);
  auto* render = app.add_subcommand("render", "attractor point cloud (CSV, or binary for .bin)");
  add_common(render, true);
  render->add_option("--kind", kind_text, "full | sigma | invertible");
  render->add_option("--epsilon", epsilon)->check(CLI::PositiveNumber);
  render->callback([&] {
    action = [&] {
      const auto l = load(common);
      const auto cloud = attractor_cloud(l.ifs, kind_of(kind_text), epsilon, l.budget);
      if (common.output.empty()) {
        write_cloud_csv(out, cloud);
      } else {
        save_cloud(common.output, cloud);
      }
    };
  });

  std::string scales_text = "3:8";
  std::uint64_t seed = 0;
  std::string table_path;
  auto cloud_for = [&](const std::vector<double>& scales) {
    if (!is_document(common.input)) return load_cloud(common.input);
    const auto l = load(common);
    double smallest = scales.empty() ? epsilon : *std::min_element(scales.begin(), scales.end());
    return attractor_cloud(l.ifs, kind_of(kind_text), std::min(epsilon, smallest / 4.0), l.budget);
  };
  auto* boxdim = app.add_subcommand("boxdim", "box-counting slope of a cloud or a rendered document");
  add_common(boxdim, false);
  boxdim->add_option("--scales", scales_text, "dyadic exponents a:b or a comma list of sizes");
  boxdim->add_option("--seed", seed);
  boxdim->add_option("--kind", kind_text, "when the input is a document");
  boxdim->add_option("--epsilon", epsilon, "rendering resolution for documents");
  boxdim->add_option("--table", table_path, "write the count table as CSV");
  boxdim->callback([&] {
    action = [&] {
      const auto scales = parse_scales(scales_text);
      const auto est = box_dimension(cloud_for(scales), scales, seed);
      print_box(out, est);
      if (!table_path.empty()) {
        std::ofstream t(table_path);
        if (!t) throw Error(ErrorCategory::Io, "cli", "OpenFailed", "cannot write " + table_path);
        write_box_table_csv(t, est);
      }
    };
  });

  double angle = 0.0;
  std::string project_scales;
  auto* project = app.add_subcommand("project", "orthogonal projection onto a line");
  add_common(project, true);
  project->add_option("--angle", angle, "line angle in radians");
  project->add_option("--kind", kind_text, "when the input is a document");
  project->add_option("--epsilon", epsilon, "rendering resolution for documents");
  project->add_option("--scales", project_scales, "also fit a box-counting slope");
  project->add_option("--seed", seed);
  project->callback([&] {
    action = [&] {
      const auto scales = project_scales.empty() ? std::vector<double>{} : parse_scales(project_scales);
      const auto projected = project_cloud(cloud_for(scales), Direction(angle));
      emit(common, out, [&](std::ostream& o) { write_projection_csv(o, projected); });
      if (!scales.empty()) print_box(common.output.empty() ? err : out, box_dimension(projected, scales, seed));
    };
  });

  std::string part = "1";
  std::optional<std::uint64_t> experiment_seed;
  ExperimentConfig experiment_config;
  auto* experiment = app.add_subcommand("experiment", "box-counting experiment for the dimension results");
  add_common(experiment, true);
  experiment->add_option("--part", part, "1, 2 or 3");
  experiment->add_option("--seed", experiment_seed);
  experiment->add_option("--epsilon", experiment_config.epsilon)->check(CLI::PositiveNumber);
  experiment->add_option("--scale-from", experiment_config.scale_from);
  experiment->add_option("--scale-to", experiment_config.scale_to);
  experiment->add_option("--angles", experiment_config.angle_sweep)->check(CLI::PositiveNumber);
  experiment->callback([&] {
    action = [&] {
      const auto l = load(common);
      const auto scenario = parse_scenario(part);
      if (!scenario) throw PreconditionError("cli", "UnknownPart", "part must be 1, 2 or 3, got " + part);
      experiment_config.node_budget = l.budget;
      const std::uint64_t s = experiment_seed ? *experiment_seed : l.doc.options.seed.value_or(0);
      const auto report = theorem_experiment(l.ifs, *scenario, s, experiment_config);
      emit(common, out, [&](std::ostream& o) { o << report.to_text(); });
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "cli: UsageError: " << e.what() << '\n';
    return kExitPrecondition;
  }

  if (threads > 0) set_worker_threads(threads);
  try {
    action();
  } catch (const Error& e) {
    err << e.what() << '\n';
    switch (e.category()) {
      case ErrorCategory::Budget:
        return kExitBudget;
      case ErrorCategory::Io:
        return kExitIo;
      case ErrorCategory::Precondition:
      case ErrorCategory::Parse:
        break;
    }
    return kExitPrecondition;
  }
  return status;
}

}  // namespace affthermo::cli
