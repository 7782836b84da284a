#include "robustmct/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "robustmct/contrast.hpp"
#include "robustmct/mlt.hpp"
#include "robustmct/nparm.hpp"
#include "robustmct/robust.hpp"

namespace robustmct {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

int worker_count(int requested) {
    int n = requested > 0 ? requested : static_cast<int>(std::thread::hardware_concurrency());
    if (n < 1) n = 1;
    if (const char* cap = std::getenv("ROBUST_MCT_THREADS")) {
        const int c = std::atoi(cap);
        if (c > 0) n = std::min(n, c);
    }
    return n;
}

// rejection decision: smallest adjusted p < alpha iff the max-|t| rectangle
// probability leaves more than alpha outside
bool rejects_two_sided(const VectorXd& tstats, const CorrelationMatrix& corr, double df,
                       double alpha, const MvtOptions& opts) {
    const double tmax = tstats.cwiseAbs().maxCoeff();
    if (tmax == 0.0) return false;
    const double cover = mvt_rectangle(VectorXd::Constant(corr.dim(), -tmax),
                                       VectorXd::Constant(corr.dim(), tmax), corr, df, opts)
                             .value;
    return 1.0 - cover < alpha;
}

MvtOptions sim_mvt_options() {
    MvtOptions opts;
    opts.abs_error = 5e-4;
    opts.max_points = std::size_t(1) << 18;
    return opts;
}

bool run_procedure(Procedure proc, const GroupedSample& sample, double alpha) {
    const MvtOptions opts = sim_mvt_options();
    const ContrastMatrix contrasts = dunnett_contrasts(sample.k());
    switch (proc) {
        case Procedure::Dun: {
            const PooledVariance pv = pooled_variance(sample);
            if (pv.s2 <= 0.0) throw degenerate_data_error("zero pooled variance");
            const MatrixXd& c = contrasts.coefficients();
            VectorXd est = c * sample.means();
            VectorXd se(est.size());
            for (int j = 0; j < est.size(); ++j) {
                double s = 0.0;
                for (int l = 0; l < sample.num_groups(); ++l)
                    s += c(j, l) * c(j, l) / sample.n(l);
                se(j) = std::sqrt(pv.s2 * s);
            }
            return rejects_two_sided(est.cwiseQuotient(se), dunnett_correlation(sample.sizes()),
                                     pv.df, alpha, opts);
        }
        case Procedure::Sat: {
            const auto sw = satterthwaite(HeteroSummary::from_sample(sample), contrasts);
            const VectorXd est = contrasts.coefficients() * sample.means();
            const VectorXd se = sw.contrast_variances.cwiseSqrt();
            int min_n = sample.n(0);
            for (int l = 1; l < sample.num_groups(); ++l) min_n = std::min(min_n, sample.n(l));
            return rejects_two_sided(est.cwiseQuotient(se), sw.correlation,
                                     std::max(1, min_n - 1), alpha, opts);
        }
        case Procedure::SaW: {
            const auto sr = sandwich_covariance(sample, contrasts);
            const VectorXd est = contrasts.coefficients() * sample.means();
            const VectorXd se = sr.contrast_covariance.diagonal().cwiseSqrt();
            return rejects_two_sided(est.cwiseQuotient(se), sr.correlation, sr.df, alpha, opts);
        }
        case Procedure::Rob: {
            const MFit fit = m_estimate_oneway(sample);
            const int k = sample.k();
            const MatrixXd cov = fit.covariance.bottomRightCorner(k, k);
            const VectorXd se = cov.diagonal().cwiseSqrt();
            const VectorXd t = fit.coefficients.tail(k).cwiseQuotient(se);
            return rejects_two_sided(t, correlation_from_covariance(cov),
                                     sample.total_n() - (k + 1), alpha, opts);
        }
        case Procedure::MLT: {
            MltOptions mopts;
            TransformationModel model = fit_mlt(sample, mopts);
            if (!model.converged) throw numeric_domain_error("MLT fit did not converge");
            const int k = sample.k();
            const MatrixXd cov = model.covariance.bottomRightCorner(k, k);
            const VectorXd se = cov.diagonal().cwiseSqrt();
            if (!(se.minCoeff() > 0.0)) throw numeric_domain_error("singular shift covariance");
            const VectorXd t = model.beta.cwiseQuotient(se);
            // t version with the linear-model df for small samples
            return rejects_two_sided(t, correlation_from_covariance(cov),
                                     sample.total_n() - (k + 1), alpha, opts);
        }
        case Procedure::Rel: {
            const MaxTResult res = npar_dunnett(sample, Tail::TwoSided, alpha,
                                                EffectScale::Probit, opts);
            return res.p_adjusted.minCoeff() < alpha;
        }
    }
    return false;
}

} // namespace

std::string to_string(Procedure p) {
    switch (p) {
        case Procedure::Dun: return "dun";
        case Procedure::Sat: return "sat";
        case Procedure::SaW: return "saw";
        case Procedure::Rob: return "rob";
        case Procedure::MLT: return "mlt";
        case Procedure::Rel: return "rel";
    }
    return "?";
}

std::string to_string(SimDistribution d) {
    switch (d) {
        case SimDistribution::Normal: return "normal";
        case SimDistribution::Mixture10: return "mix10";
        case SimDistribution::Mixture20: return "mix20";
    }
    return "?";
}

Procedure procedure_from_string(const std::string& name) {
    if (name == "dun") return Procedure::Dun;
    if (name == "sat") return Procedure::Sat;
    if (name == "saw") return Procedure::SaW;
    if (name == "rob") return Procedure::Rob;
    if (name == "mlt") return Procedure::MLT;
    if (name == "rel") return Procedure::Rel;
    throw invalid_design_error("unknown procedure '" + name +
                               "' (valid: dun sat saw rob mlt rel)");
}

const ProcedureOutcome& SimResult::outcome(Procedure p) const {
    for (const auto& o : outcomes)
        if (o.procedure == p) return o;
    throw invalid_design_error("procedure not part of this simulation");
}

GroupedSample generate_sample(const SimScenario& scenario, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double contamination = scenario.distribution == SimDistribution::Mixture10 ? 0.10
                                 : scenario.distribution == SimDistribution::Mixture20 ? 0.20
                                                                                        : 0.0;
    std::vector<Group> groups;
    for (int g = 0; g < 4; ++g) {
        const double mu = (scenario.alternative && g > 0) ? scenario.effect : 0.0;
        const int n = scenario.sample_sizes[static_cast<std::size_t>(g)];
        VectorXd y(n);
        for (int i = 0; i < n; ++i) {
            if (scenario.distribution == SimDistribution::Normal) {
                const double sd = (g == 3) ? scenario.xi : 1.0;  // top-dose inflation
                y(i) = mu + sd * normal(rng);
            } else {
                // skewed mixture: upshifted component with xi-inflated SD
                if (unif(rng) < contamination)
                    y(i) = mu + 3.0 + scenario.xi * normal(rng);
                else
                    y(i) = mu + normal(rng);
            }
        }
        groups.push_back({g == 0 ? "0" : "d" + std::to_string(g), std::move(y),
                          static_cast<double>(g)});
    }
    return GroupedSample(std::move(groups));
}

SimResult run_scenario(const SimScenario& scenario) {
    if (scenario.runs < 100) throw invalid_design_error("need at least 100 runs");
    if (scenario.xi < 1.0) throw invalid_design_error("xi must be >= 1");
    const int nproc = static_cast<int>(scenario.procedures.size());
    const int nthreads = worker_count(scenario.threads);

    struct Counts {
        std::vector<long> rejections, failures;
    };
    std::vector<Counts> per_thread(nthreads);
    for (auto& c : per_thread) {
        c.rejections.assign(nproc, 0);
        c.failures.assign(nproc, 0);
    }

    std::atomic<int> next{0};
    auto worker = [&](int tid) {
        Counts& counts = per_thread[tid];
        while (true) {
            const int rep = next.fetch_add(1);
            if (rep >= scenario.runs) break;
            std::mt19937_64 rng(splitmix64(scenario.seed ^ splitmix64(rep + 1)));
            const GroupedSample sample = generate_sample(scenario, rng);
            for (int p = 0; p < nproc; ++p) {
                try {
                    if (run_procedure(scenario.procedures[p], sample, scenario.alpha))
                        ++counts.rejections[p];
                } catch (const std::exception&) {
                    ++counts.failures[p];
                }
            }
        }
    };

    std::vector<std::thread> pool;
    for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker, t);
    worker(0);
    for (auto& t : pool) t.join();

    SimResult result;
    result.scenario = scenario;
    for (int p = 0; p < nproc; ++p) {
        ProcedureOutcome o;
        o.procedure = scenario.procedures[p];
        for (const auto& c : per_thread) {
            o.rejections += static_cast<int>(c.rejections[p]);
            o.failures += static_cast<int>(c.failures[p]);
        }
        o.completed = scenario.runs - o.failures;
        if (o.failures > 0.05 * scenario.runs) result.unreliable = true;
        result.outcomes.push_back(o);
    }
    return result;
}

double calibrated_effect() {
    // frozen by calibrate_effect(): classical Dunnett any-rejection power 0.84
    // at xi = 1, balanced n = 10, sigma = 1, alpha = 0.05 two-sided
    // (empirical power 0.8423 at 10000 runs, default seed)
    return 1.228125;
}

double calibrate_effect(int runs, std::uint64_t seed, double target, double tol) {
    SimScenario s;
    s.id = "calibration";
    s.alternative = true;
    s.runs = runs;
    s.seed = seed;
    s.procedures = {Procedure::Dun};
    double lo = 0.3, hi = 2.5;
    for (int it = 0; it < 40; ++it) {
        s.effect = 0.5 * (lo + hi);
        const double power = run_scenario(s).outcome(Procedure::Dun).proportion();
        if (std::abs(power - target) <= tol) return s.effect;
        (power < target ? lo : hi) = s.effect;
    }
    return 0.5 * (lo + hi);
}

std::vector<SimScenario> table4_scenarios(const Table4Config& config) {
    struct Row {
        SimDistribution dist;
        std::array<int, 4> n;
        std::vector<double> xis;
    };
    const std::vector<Row> designs = {
        {SimDistribution::Normal, {10, 10, 10, 10}, {1, 2, 3, 4}},
        {SimDistribution::Normal, {20, 10, 10, 10}, {1, 4}},
        {SimDistribution::Normal, {5, 20, 20, 20}, {1, 4}},
        {SimDistribution::Mixture10, {20, 10, 10, 10}, {1, 2, 3, 4}},
        {SimDistribution::Mixture20, {5, 20, 20, 20}, {1, 4}},
    };
    std::vector<SimScenario> grid;
    for (const auto& row : designs)
        for (bool h1 : {false, true})
            for (double xi : row.xis) {
                SimScenario s;
                s.distribution = row.dist;
                s.xi = xi;
                s.sample_sizes = row.n;
                s.alternative = h1;
                s.effect = h1 ? calibrated_effect() : 0.0;
                s.runs = config.runs;
                s.procedures = config.procedures;
                s.threads = config.threads;
                std::ostringstream id;
                id << (h1 ? "h1" : "h0") << "-" << to_string(row.dist) << "-xi"
                   << static_cast<int>(xi) << "-n" << row.n[0] << "." << row.n[3];
                s.id = id.str();
                s.seed = splitmix64(config.seed ^ std::hash<std::string>{}(s.id));
                if (!config.row_filter.empty()) {
                    bool keep = false;
                    for (const auto& f : config.row_filter)
                        if (s.id.find(f) != std::string::npos) keep = true;
                    if (!keep) continue;
                }
                grid.push_back(std::move(s));
            }
    return grid;
}

std::vector<SimResult> table4(const Table4Config& config) {
    std::vector<SimResult> results;
    for (const auto& scenario : table4_scenarios(config))
        results.push_back(run_scenario(scenario));
    return results;
}

std::string sim_results_csv(const std::vector<SimResult>& results) {
    std::ostringstream out;
    out << "scenario_id,procedure,hypothesis,xi,n0,n1,n2,n3,rejections,runs,proportion,mcse,"
           "failures\n";
    out.precision(15);
    for (const auto& r : results)
        for (const auto& o : r.outcomes) {
            const auto& s = r.scenario;
            out << s.id << "," << to_string(o.procedure) << "," << (s.alternative ? "H1" : "H0")
                << "," << s.xi << "," << s.sample_sizes[0] << "," << s.sample_sizes[1] << ","
                << s.sample_sizes[2] << "," << s.sample_sizes[3] << "," << o.rejections << ","
                << s.runs << "," << o.proportion() << "," << o.mcse() << "," << o.failures
                << "\n";
        }
    return out.str();
}

} // namespace robustmct
