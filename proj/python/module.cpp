#include "bbcrop/config.hpp"
#include "bbcrop/crop.hpp"
#include "bbcrop/dante.hpp"
#include "bbcrop/dp.hpp"
#include "bbcrop/errors.hpp"
#include "bbcrop/io.hpp"
#include "bbcrop/sim.hpp"
#include "bbcrop/star.hpp"

#include <pybind11/eigen.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace bbcrop;

PYBIND11_MODULE(_bbcrop, m) {
  m.doc() = "Relaxation-optimized broadband polarization transfer";

  py::register_exception<ParameterError>(m, "ParameterError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<AxisError>(m, "AxisError", PyExc_ValueError);
  py::register_exception<AssemblyError>(m, "AssemblyError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);

  py::class_<SpinSystem>(m, "SpinSystem")
      .def(py::init([](double J, double kDD, double kCSA_I, double kCSA_S, double kc_I, double kc_S) {
             return SpinSystem{J, kDD, kCSA_I, kCSA_S, kc_I, kc_S};
           }),
           py::arg("J"), py::arg("kDD") = 0.0, py::arg("kCSA_I") = 0.0, py::arg("kCSA_S") = 0.0,
           py::arg("kc_I") = 0.0, py::arg("kc_S") = 0.0)
      .def_static("from_aggregates", &SpinSystem::from_aggregates, py::arg("J"), py::arg("ka"), py::arg("kc"))
      .def_readwrite("J", &SpinSystem::J)
      .def_readwrite("kDD", &SpinSystem::kDD)
      .def_readwrite("kCSA_I", &SpinSystem::kCSA_I)
      .def_readwrite("kCSA_S", &SpinSystem::kCSA_S)
      .def_readwrite("kc_I", &SpinSystem::kc_I)
      .def_readwrite("kc_S", &SpinSystem::kc_S)
      .def_property_readonly("ka", &SpinSystem::ka)
      .def_property_readonly("kc", &SpinSystem::kc)
      .def("validate", &SpinSystem::validate)
      .def(py::self == py::self)
      .def("__repr__", [](const SpinSystem& s) {
        return "SpinSystem(J=" + std::to_string(s.J) + ", ka=" + std::to_string(s.ka()) +
               ", kc=" + std::to_string(s.kc()) + ")";
      });

  py::class_<CropConstants>(m, "CropConstants")
      .def_readonly("eta", &CropConstants::eta)
      .def_readonly("gamma", &CropConstants::gamma)
      .def_readonly("xi", &CropConstants::xi)
      .def_readonly("chi", &CropConstants::chi)
      .def_readonly("theta", &CropConstants::theta)
      .def_readonly("zeta", &CropConstants::zeta)
      .def_readonly("residual", &CropConstants::residual);

  m.def("efficiency_bound", &efficiency_bound, py::arg("sys"));
  m.def("solve_gamma", &solve_gamma, py::arg("sys"));

  py::class_<ReducedTrajectory>(m, "ReducedTrajectory")
      .def_readonly("dt", &ReducedTrajectory::dt)
      .def_readonly("eta", &ReducedTrajectory::eta)
      .def_readonly("gamma", &ReducedTrajectory::gamma)
      .def_readonly("t", &ReducedTrajectory::t)
      .def_readonly("amplitude", &ReducedTrajectory::amplitude)
      .def_readonly("phase", &ReducedTrajectory::phase)
      .def_property_readonly("r2",
                             [](const ReducedTrajectory& tr) {
                               std::vector<double> r;
                               for (const auto& s : tr.states) r.push_back(std::hypot(s.l2, s.z2));
                               return r;
                             })
      .def("__len__", &ReducedTrajectory::size)
      .def("duration", &ReducedTrajectory::duration)
      .def("total_flip", &ReducedTrajectory::total_flip)
      .def(py::self == py::self);

  m.def(
      "generate_crop",
      [](const SpinSystem& sys, double stop_fraction, double dt) {
        CropOptions o;
        o.stop_fraction = stop_fraction;
        o.dt = dt;
        return generate_crop(sys, o);
      },
      py::arg("sys"), py::arg("stop_fraction") = 0.995, py::arg("dt") = 0.0);
  m.def("verify_orthogonality", &verify_orthogonality, py::arg("traj"));
  m.def("replay_full", &replay_full, py::arg("traj"), py::arg("sys"));

  py::class_<DanteStep>(m, "DanteStep")
      .def(py::init([](double flip, double phase, double delay) { return DanteStep{flip, phase, delay}; }),
           py::arg("flip"), py::arg("phase"), py::arg("delay"))
      .def_readwrite("flip", &DanteStep::flip)
      .def_readwrite("phase", &DanteStep::phase)
      .def_readwrite("delay", &DanteStep::delay);

  py::class_<DanteSequence>(m, "DanteSequence")
      .def(py::init<>())
      .def_readwrite("steps", &DanteSequence::steps)
      .def("__len__", &DanteSequence::size)
      .def("total_flip", &DanteSequence::total_flip)
      .def("duration", &DanteSequence::duration)
      .def(py::self == py::self);

  m.def(
      "dante_discretize",
      [](const ReducedTrajectory& tr, std::size_t periods) { return dante_discretize(tr, periods); },
      py::arg("traj"), py::arg("periods"));
  m.def(
      "refine_dante", [](const DanteSequence& seed, const SpinSystem& sys) { return refine_dante(seed, sys); },
      py::arg("seed"), py::arg("sys"));
  m.def("dante_efficiency", &dante_efficiency, py::arg("seq"), py::arg("sys"));

  py::class_<PulseSequence>(m, "PulseSequence")
      .def_readonly("label", &PulseSequence::label)
      .def_readonly("tags", &PulseSequence::tags)
      .def_readonly("period_marks", &PulseSequence::period_marks)
      .def_readonly("ledger", &PulseSequence::ledger)
      .def_readonly("sys", &PulseSequence::sys)
      .def("__len__", [](const PulseSequence& s) { return s.events.size(); })
      .def("duration", &PulseSequence::duration)
      .def(py::self == py::self);

  m.def(
      "build_bbcrop",
      [](const DanteSequence& d, const SpinSystem& sys, const std::string& mode, double nu1_I, double nu1_S,
         const std::string& pattern, bool bookkeeping) {
        StarOptions o;
        o.mode = parse_mode(mode);
        o.nu1_I = nu1_I;
        o.nu1_S = nu1_S;
        o.pattern = parse_pattern(pattern);
        o.bookkeeping = bookkeeping;
        return build_bbcrop(d, sys, o);
      },
      py::arg("dante"), py::arg("sys"), py::arg("mode") = "ideal", py::arg("nu1_I") = 0.0,
      py::arg("nu1_S") = 0.0, py::arg("pattern") = "R3R1R3", py::arg("bookkeeping") = true);
  m.def(
      "plain_sequence",
      [](const DanteSequence& d, const SpinSystem& sys) { return plain_sequence(d, sys); }, py::arg("dante"),
      py::arg("sys"));

  m.def(
      "run_sequence",
      [](const SpinSystem& sys, const PulseSequence& seq, double offset, double rf_scale) {
        return run_sequence(sys, seq, offset, rf_scale).efficiency;
      },
      py::arg("sys"), py::arg("seq"), py::arg("offset") = 0.0, py::arg("rf_scale") = 1.0);
  m.def(
      "offset_profile",
      [](const SpinSystem& sys, const PulseSequence& seq, const std::vector<double>& offsets) {
        return offset_profile(sys, seq, offsets).efficiency;
      },
      py::arg("sys"), py::arg("seq"), py::arg("offsets"));
  m.def(
      "rf_inhom_average",
      [](const SpinSystem& sys, const PulseSequence& seq, const std::vector<double>& offsets, double fwhm,
         std::size_t samples) {
        return rf_inhom_average(sys, seq, offsets, RfDistribution::gaussian(fwhm, samples)).efficiency;
      },
      py::arg("sys"), py::arg("seq"), py::arg("offsets"), py::arg("fwhm") = 0.1, py::arg("samples") = 7);
  m.def("default_offset_grid", &default_offset_grid, py::arg("sys"));

  py::class_<BaselineCurve>(m, "BaselineCurve")
      .def_readonly("times", &BaselineCurve::times)
      .def_readonly("efficiency", &BaselineCurve::efficiency)
      .def_readonly("best", &BaselineCurve::best)
      .def_readonly("best_time", &BaselineCurve::best_time);
  m.def("inept_reference", &inept_reference, py::arg("sys"), py::arg("times"));
  m.def("cript_reference", &cript_reference, py::arg("sys"), py::arg("times"));
  m.def("time_grid", &time_grid, py::arg("upper"), py::arg("n"));

  py::class_<DpExtraction>(m, "DpExtraction")
      .def_readonly("sequence", &DpExtraction::sequence)
      .def_readonly("predicted", &DpExtraction::predicted)
      .def_readonly("replayed", &DpExtraction::replayed);
  m.def(
      "dp_design",
      [](const SpinSystem& sys, std::size_t stages, std::size_t grid) {
        DpOptions o;
        o.stages = stages;
        o.grid = grid;
        return extract_sequence(value_iteration(sys, o));
      },
      py::arg("sys"), py::arg("stages"), py::arg("grid") = 100);

  m.def("format_sequence", &format_sequence, py::arg("seq"));
  m.def("parse_sequence", &parse_sequence, py::arg("text"));
  m.def("format_dante", &format_dante, py::arg("seq"));
  m.def("parse_dante", &parse_dante, py::arg("text"));
  m.def("format_table", &format_table, py::arg("seq"));
}
