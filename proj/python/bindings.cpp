#include "affthermo/classify.hpp"
#include "affthermo/document.hpp"
#include "affthermo/errors.hpp"
#include "affthermo/geometry.hpp"
#include "affthermo/mat2.hpp"
#include "affthermo/pressure.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace affthermo;

namespace {

using Rows = std::array<std::array<double, 2>, 2>;

Mat2 to_mat(const Rows& r) { return {r[0][0], r[0][1], r[1][0], r[1][1]}; }

AffineIFS make_ifs(const std::vector<Rows>& matrices, const std::vector<std::array<double, 2>>& translations,
                   const std::string& name) {
  if (!translations.empty() && translations.size() != matrices.size()) {
    throw PreconditionError("cli", "DomainError", "need one translation per matrix");
  }
  std::vector<AffineMap> maps;
  for (std::size_t i = 0; i < matrices.size(); ++i) {
    AffineMap m;
    m.linear = to_mat(matrices[i]);
    if (!translations.empty()) m.translation = {translations[i][0], translations[i][1]};
    maps.push_back(m);
  }
  return AffineIFS(std::move(maps), name);
}

SubshiftKind kind_of(const std::string& text) {
  auto k = parse_subshift_kind(text);
  if (!k) throw PreconditionError("cli", "UnknownKind", "kind must be full, sigma or invertible");
  return *k;
}

py::dict estimate_dict(const PressureEstimate& e) {
  py::dict d;
  d["s"] = e.s;
  d["kind"] = std::string(to_string(e.kind));
  d["depth"] = e.depth;
  d["lower"] = e.lower;
  d["upper"] = e.upper;
  d["certificate"] = describe(e.certificate);
  return d;
}

}  // namespace

PYBIND11_MODULE(affthermo, m) {
  m.doc() = "Pressure, affinity dimension and attractor geometry for planar affine IFSs";

  static py::exception<Error> base(m, "Error");
  static py::exception<PreconditionError> precondition(m, "PreconditionError", base.ptr());
  static py::exception<BudgetExceeded> budget(m, "BudgetExceeded", base.ptr());
  static py::exception<ParseError> parse(m, "ParseError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const PreconditionError& e) {
      PyErr_SetString(precondition.ptr(), e.what());
    } catch (const ParseError& e) {
      PyErr_SetString(parse.ptr(), e.what());
    } catch (const Error& e) {
      if (e.category() == ErrorCategory::Budget) {
        PyErr_SetString(budget.ptr(), e.what());
      } else {
        PyErr_SetString(base.ptr(), e.what());
      }
    }
  });

  m.def("singular_values", [](const Rows& a) {
    const auto sv = singular_values(to_mat(a));
    return std::make_pair(sv.first, sv.second);
  });
  m.def("svf_phi", [](const Rows& a, double s) { return svf_phi(to_mat(a), s); });

  py::class_<AffineIFS>(m, "IFS")
      .def(py::init(&make_ifs), py::arg("matrices"), py::arg("translations") = std::vector<std::array<double, 2>>{},
           py::arg("name") = "")
      .def_static("from_document", [](const std::string& text) { return IfsDocument::parse(text).to_ifs(); })
      .def("__len__", &AffineIFS::size)
      .def_property_readonly("name", &AffineIFS::name)
      .def_property_readonly("ranks", [](const AffineIFS& ifs) {
        std::vector<int> r;
        for (std::size_t i = 0; i < ifs.size(); ++i) r.push_back(ifs.letter_rank(i));
        return r;
      })
      .def("to_document", [](const AffineIFS& ifs) { return IfsDocument::from_ifs(ifs).serialize(); });

  m.def("classify_report", [](const AffineIFS& ifs) { return format_report(classify(ifs), ifs); });

  m.def(
      "pressure",
      [](const AffineIFS& ifs, double s, int n, const std::string& kind) {
        return estimate_dict(kind == "auto" ? pressure_dispatch(ifs, s, n) : pressure_estimate(ifs, kind_of(kind), s, n));
      },
      py::arg("ifs"), py::arg("s"), py::arg("depth"), py::arg("kind") = "auto");

  m.def(
      "affinity_dimension",
      [](const AffineIFS& ifs, const std::string& kind, double tol) {
        const auto d = affinity_dimension(ifs, kind_of(kind), tol);
        return py::make_tuple(d.lo, d.hi, d.depth);
      },
      py::arg("ifs"), py::arg("kind") = "full", py::arg("tol") = 1e-3);

  m.def(
      "pressure_gap",
      [](const AffineIFS& ifs, double s, int max_depth) {
        GapOptions opts;
        opts.max_depth = max_depth;
        const auto g = pressure_gap(ifs, s, opts);
        py::dict d;
        d["certified"] = g.status == PressureGap::Status::CertifiedGap;
        d["lower_full"] = g.lower_full;
        d["upper_inv"] = g.upper_inv;
        d["depth"] = g.depth;
        return d;
      },
      py::arg("ifs"), py::arg("s"), py::arg("max_depth") = 14);

  m.def(
      "attractor",
      [](const AffineIFS& ifs, const std::string& kind, double eps) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& p : attractor_cloud(ifs, kind_of(kind), eps).points) pts.emplace_back(p.x, p.y);
        return pts;
      },
      py::arg("ifs"), py::arg("kind") = "full", py::arg("epsilon") = 1.0 / 256);

  m.def(
      "box_dimension",
      [](const std::vector<std::pair<double, double>>& pts, int from, int to, std::uint64_t seed) {
        PointCloud cloud;
        for (const auto& [x, y] : pts) cloud.points.push_back({x, y});
        return box_dimension(cloud, dyadic_scales(from, to), seed).slope;
      },
      py::arg("points"), py::arg("scale_from") = 3, py::arg("scale_to") = 8, py::arg("seed") = 0);

  m.def(
      "experiment",
      [](const AffineIFS& ifs, int part, std::uint64_t seed) {
        const auto scenario = parse_scenario(std::to_string(part));
        if (!scenario) throw PreconditionError("geometry", "UnknownPart", "part must be 1, 2 or 3");
        const auto report = theorem_experiment(ifs, *scenario, seed);
        py::dict values;
        for (const auto& [k, v] : report.values) values[py::str(k)] = v;
        return values;
      },
      py::arg("ifs"), py::arg("part"), py::arg("seed") = 0);
}
