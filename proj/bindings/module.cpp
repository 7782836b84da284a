// Python bindings for the robustmct core: data ingestion, the max-t contrast
// tests and their robust / nonparametric / transformation variants, and the
// simulation driver.
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "robustmct/contrast.hpp"
#include "robustmct/csv.hpp"
#include "robustmct/mmm.hpp"
#include "robustmct/nparm.hpp"
#include "robustmct/robust.hpp"
#include "robustmct/sim.hpp"

namespace py = pybind11;
using namespace robustmct;

namespace {

GroupedSample make_sample(const std::vector<std::pair<std::string, VectorXd>>& groups) {
    std::vector<Group> gs;
    gs.reserve(groups.size());
    for (const auto& [label, values] : groups) gs.push_back({label, values, std::nullopt});
    return GroupedSample(std::move(gs));
}

Tail parse_tail(const std::string& s) {
    if (s == "two-sided") return Tail::TwoSided;
    if (s == "greater") return Tail::Greater;
    if (s == "less") return Tail::Less;
    throw invalid_design_error("tail must be two-sided, greater, or less");
}

EffectScale parse_scale(const std::string& s) {
    if (s == "probit") return EffectScale::Probit;
    if (s == "logit") return EffectScale::Logit;
    if (s == "identity") return EffectScale::Identity;
    throw invalid_design_error("scale must be probit, logit, or identity");
}

} // namespace

PYBIND11_MODULE(_robustmct, m) {
    m.doc() = "Dunnett-type multiple comparisons against a control: classical, "
              "robust, nonparametric, and transformation-model variants";

    py::register_exception<invalid_design_error>(m, "InvalidDesignError", PyExc_ValueError);
    py::register_exception<degenerate_data_error>(m, "DegenerateDataError", PyExc_ValueError);

    py::class_<GroupedSample>(m, "GroupedSample")
        .def(py::init(&make_sample), py::arg("groups"),
             "Build from [(label, values), ...]; the first entry is the control.")
        .def_property_readonly("num_groups", &GroupedSample::num_groups)
        .def_property_readonly("total_n", &GroupedSample::total_n)
        .def("n", &GroupedSample::n, py::arg("i"))
        .def("label", [](const GroupedSample& s, int i) { return s.group(i).label; },
             py::arg("i"))
        .def("values", [](const GroupedSample& s, int i) { return s.group(i).responses; },
             py::arg("i"))
        .def("means", &GroupedSample::means)
        .def("variances", &GroupedSample::variances);

    py::class_<MaxTResult>(m, "MaxTResult")
        .def_readonly("labels", &MaxTResult::labels)
        .def_readonly("estimates", &MaxTResult::estimates)
        .def_readonly("std_errors", &MaxTResult::std_errors)
        .def_readonly("t_stats", &MaxTResult::t_stats)
        .def_readonly("p_adjusted", &MaxTResult::p_adjusted)
        .def_readonly("lower", &MaxTResult::lower)
        .def_readonly("upper", &MaxTResult::upper)
        .def_readonly("df", &MaxTResult::df)
        .def_readonly("critical_value", &MaxTResult::critical_value)
        .def_readonly("alpha", &MaxTResult::alpha)
        .def_readonly("correlation", &MaxTResult::correlation)
        .def("__repr__", [](const MaxTResult& r) {
            return "<MaxTResult with " + std::to_string(r.estimates.size()) + " comparisons>";
        });

    m.def(
        "load_samples",
        [](const std::string& path, const std::string& group_column,
           const std::string& control, const std::vector<std::string>& responses,
           bool drop_missing) {
            IngestConfig cfg;
            cfg.group_column = group_column;
            cfg.control_label = control;
            cfg.drop_missing = drop_missing;
            return ingest_samples(read_csv(path), cfg, responses);
        },
        py::arg("path"), py::arg("group_column"), py::arg("control"), py::arg("responses"),
        py::arg("drop_missing") = false,
        "Read a CSV file into one GroupedSample per response column.");

    m.def(
        "dunnett_test",
        [](const GroupedSample& sample, const std::string& variance, const std::string& tail,
           double alpha) {
            const auto contrasts = dunnett_contrasts(sample);
            VarianceMethod method = PooledMethod{};
            if (variance == "satterthwaite") method = SatterthwaiteMethod{};
            else if (variance == "sandwich") {
                SandwichMethod sm;
                sm.df = static_cast<double>(sample.total_n() - sample.num_groups());
                method = sm;
            } else if (variance != "pooled") {
                throw invalid_design_error(
                    "variance must be pooled, satterthwaite, or sandwich");
            }
            return max_t_test(sample, contrasts, method, parse_tail(tail), alpha);
        },
        py::arg("sample"), py::arg("variance") = "pooled", py::arg("tail") = "two-sided",
        py::arg("alpha") = 0.05,
        "Dunnett many-to-one comparisons with simultaneous intervals.");

    m.def(
        "robust_dunnett",
        [](const GroupedSample& sample, const std::string& tail, double alpha) {
            return robust_dunnett(sample, {}, parse_tail(tail), alpha);
        },
        py::arg("sample"), py::arg("tail") = "two-sided", py::arg("alpha") = 0.05,
        "Dunnett-type comparisons on Huber M-estimates.");

    m.def(
        "npar_dunnett",
        [](const GroupedSample& sample, const std::string& tail, double alpha,
           const std::string& scale) {
            return npar_dunnett(sample, parse_tail(tail), alpha, parse_scale(scale));
        },
        py::arg("sample"), py::arg("tail") = "two-sided", py::arg("alpha") = 0.05,
        py::arg("scale") = "probit",
        "Nonparametric relative-effect (Brunner-Munzel) comparisons.");

    py::class_<TransformationModel>(m, "TransformationModel")
        .def_readonly("theta", &TransformationModel::theta)
        .def_readonly("beta", &TransformationModel::beta)
        .def_readonly("loglik", &TransformationModel::loglik)
        .def_readonly("converged", &TransformationModel::converged)
        .def_readonly("model_df", &TransformationModel::model_df)
        .def("transform", &TransformationModel::transform, py::arg("y"));

    m.def(
        "fit_mlt",
        [](const GroupedSample& sample, int order, const std::string& link) {
            MltOptions opts;
            opts.order = order;
            if (link == "logistic") opts.link = Link::Logistic;
            else if (link != "normal")
                throw invalid_design_error("link must be normal or logistic");
            return fit_mlt(sample, opts);
        },
        py::arg("sample"), py::arg("order") = 5, py::arg("link") = "normal",
        "Fit a monotone Bernstein transformation model with group shifts.");

    m.def(
        "mlt_dunnett",
        [](const TransformationModel& model, std::optional<double> df,
           const std::string& tail, double alpha) {
            return mlt_dunnett(model, df, parse_tail(tail), alpha);
        },
        py::arg("model"), py::arg("df") = std::nullopt, py::arg("tail") = "two-sided",
        py::arg("alpha") = 0.05,
        "Wald-type Dunnett test on transformation-model shift coefficients.");

    m.def(
        "colr_dunnett",
        [](const GroupedSample& sample, int order, const std::string& tail, double alpha,
           std::optional<double> df) {
            const auto res = colr_dunnett(sample, order, parse_tail(tail), alpha, df);
            py::dict out;
            out["wald"] = res.wald;
            out["odds_ratio"] = res.odds_ratio;
            out["or_lower"] = res.or_lower;
            out["or_upper"] = res.or_upper;
            return out;
        },
        py::arg("sample"), py::arg("order") = 5, py::arg("tail") = "two-sided",
        py::arg("alpha") = 0.05, py::arg("df") = std::nullopt,
        "Continuous-outcome logistic regression odds ratios against the control.");

    m.def(
        "mmm_dunnett",
        [](const std::vector<GroupedSample>& samples,
           const std::vector<std::string>& endpoint_names, int order, const std::string& tail,
           double alpha) {
            std::vector<TransformationModel> models;
            MltOptions opts;
            opts.order = order;
            for (const auto& s : samples) models.push_back(fit_mlt(s, opts));
            return mmm_dunnett(stack_models(models, endpoint_names), parse_tail(tail), alpha);
        },
        py::arg("samples"), py::arg("endpoint_names") = std::vector<std::string>{},
        py::arg("order") = 5, py::arg("tail") = "two-sided", py::arg("alpha") = 0.05,
        "Joint transformation-model inference over several endpoints of the "
        "same subjects.");

    m.def(
        "run_simulation",
        [](int runs, std::uint64_t seed, const std::vector<std::string>& procedures,
           const std::vector<std::string>& rows, int threads) {
            Table4Config cfg;
            cfg.runs = runs;
            cfg.seed = seed;
            cfg.threads = threads;
            cfg.row_filter = rows;
            if (!procedures.empty()) {
                cfg.procedures.clear();
                for (const auto& p : procedures)
                    cfg.procedures.push_back(procedure_from_string(p));
            }
            py::list out;
            for (const auto& res : table4(cfg)) {
                py::dict row;
                row["scenario"] = res.scenario.id;
                py::dict procs;
                for (const auto& o : res.outcomes) {
                    py::dict cell;
                    cell["rejections"] = o.rejections;
                    cell["completed"] = o.completed;
                    cell["failures"] = o.failures;
                    cell["proportion"] = o.proportion();
                    cell["mcse"] = o.mcse();
                    procs[py::str(to_string(o.procedure))] = cell;
                }
                row["procedures"] = procs;
                out.append(row);
            }
            return out;
        },
        py::arg("runs") = 1000, py::arg("seed") = 20190501,
        py::arg("procedures") = std::vector<std::string>{},
        py::arg("rows") = std::vector<std::string>{}, py::arg("threads") = 0,
        "Run the size/power simulation grid; deterministic for a fixed seed.");
}
