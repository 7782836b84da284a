// robust-mct: Dunnett-type multiple comparisons against a control with
// robust, nonparametric, and transformation-based variants, plus the
// size/power simulation driver.
#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "robustmct/contrast.hpp"
#include "robustmct/csv.hpp"
#include "robustmct/mmm.hpp"
#include "robustmct/nparm.hpp"
#include "robustmct/robust.hpp"
#include "robustmct/sim.hpp"

using namespace robustmct;
using nlohmann::json;

namespace {

constexpr std::uint64_t kDefaultSeed = 20190501;

struct CommonOpts {
    std::string input;
    std::string group_column = "dose";
    std::vector<std::string> responses;
    std::string control = "0";
    double alpha = 0.05;
    std::string tail = "two-sided";
    std::string format = "human";
    std::string df_mode = "linear-model";
    int order = 5;
    std::uint64_t seed = kDefaultSeed;
    bool drop_missing = false;
    std::string plot_data;
    std::string config_file;
};

Tail parse_tail(const std::string& s) {
    if (s == "two-sided") return Tail::TwoSided;
    if (s == "greater") return Tail::Greater;
    if (s == "less") return Tail::Less;
    throw CLI::ValidationError("--tail must be two-sided, greater, or less");
}

// plain key-value config file: one "key = value" per line, '#' comments;
// keys mirror the long option names without the leading dashes
void apply_config_file(CommonOpts& o) {
    std::ifstream in(o.config_file);
    if (!in) throw CLI::ValidationError("cannot open config file '" + o.config_file + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (eq == std::string::npos)
            throw CLI::ValidationError(o.config_file + ":" + std::to_string(lineno) +
                                       ": expected 'key = value'");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "input") o.input = value;
        else if (key == "group") o.group_column = value;
        else if (key == "response") o.responses.push_back(value);
        else if (key == "control") o.control = value;
        else if (key == "alpha") o.alpha = std::stod(value);
        else if (key == "tail") o.tail = value;
        else if (key == "format") o.format = value;
        else if (key == "df") o.df_mode = value;
        else if (key == "order") o.order = std::stoi(value);
        else if (key == "seed") o.seed = std::stoull(value);
        else if (key == "drop-missing") o.drop_missing = (value == "true" || value == "1");
        else
            throw CLI::ValidationError(o.config_file + ":" + std::to_string(lineno) +
                                       ": unknown key '" + key + "'");
    }
}

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_response = true) {
    cmd->add_option("--config", o.config_file, "key = value config file (flags override)");
    cmd->add_option("-i,--input", o.input, "input CSV file");
    cmd->add_option("-g,--group", o.group_column, "group (dose) column name");
    auto* resp = cmd->add_option("-r,--response", o.responses, "response column name(s)");
    if (needs_response) resp->expected(-1);
    cmd->add_option("-c,--control", o.control, "control group label");
    cmd->add_option("-a,--alpha", o.alpha, "familywise error level")
        ->check(CLI::Range(1e-6, 0.999999));
    cmd->add_option("--tail", o.tail, "two-sided | greater | less")
        ->check(CLI::IsMember({"two-sided", "greater", "less"}));
    cmd->add_option("-f,--format", o.format, "human | csv | json")
        ->check(CLI::IsMember({"human", "csv", "json"}));
    cmd->add_option("--df", o.df_mode, "asymptotic | linear-model")
        ->check(CLI::IsMember({"asymptotic", "linear-model"}));
    cmd->add_option("--order", o.order, "Bernstein order for mlt/colr/mmm")
        ->check(CLI::Range(1, 20));
    cmd->add_option("--seed", o.seed, "seed for randomized integration");
    cmd->add_flag("--drop-missing", o.drop_missing, "drop unparseable response values");
    cmd->add_option("--emit-plot-data", o.plot_data,
                    "write per-group points, means, and SDs to this CSV path");
}

std::vector<GroupedSample> load(const CommonOpts& o) {
    if (o.input.empty()) throw CLI::ValidationError("--input is required");
    if (o.responses.empty()) throw CLI::ValidationError("--response is required");
    const CsvTable table = read_csv(o.input);
    IngestConfig cfg;
    cfg.group_column = o.group_column;
    cfg.control_label = o.control;
    cfg.drop_missing = o.drop_missing;
    return ingest_samples(table, cfg, o.responses);
}

void emit_plot_data(const CommonOpts& o, const std::vector<GroupedSample>& samples) {
    if (o.plot_data.empty()) return;
    std::ofstream out(o.plot_data);
    out << "response,group,kind,value\n";
    out << std::setprecision(15);
    for (std::size_t r = 0; r < samples.size(); ++r) {
        const auto& s = samples[r];
        for (int g = 0; g < s.num_groups(); ++g) {
            const auto& grp = s.group(g);
            for (int i = 0; i < grp.responses.size(); ++i)
                out << o.responses[r] << "," << grp.label << ",point," << grp.responses(i)
                    << "\n";
            out << o.responses[r] << "," << grp.label << ",mean," << s.mean(g) << "\n";
            out << o.responses[r] << "," << grp.label << ",sd," << std::sqrt(s.variance(g))
                << "\n";
        }
    }
}

struct ReportRow {
    std::string comparison;
    double estimate, se, stat, p_adj, lower, upper;
};

struct Report {
    std::string method;
    std::string response;
    double df = 0.0;
    double alpha = 0.05;
    std::string tail;
    double critical_value = 0.0;
    std::vector<ReportRow> rows;
    // optional odds-ratio columns (colr)
    bool has_or = false;
    std::vector<double> odds_ratio, or_lower, or_upper;
};

Report report_from(const MaxTResult& res, const std::string& method,
                   const std::string& response, const std::string& tail) {
    Report rep;
    rep.method = method;
    rep.response = response;
    rep.df = res.df;
    rep.alpha = res.alpha;
    rep.tail = tail;
    rep.critical_value = res.critical_value;
    for (int j = 0; j < res.estimates.size(); ++j)
        rep.rows.push_back({res.labels[j], res.estimates(j), res.std_errors(j), res.t_stats(j),
                            res.p_adjusted(j), res.lower(j), res.upper(j)});
    return rep;
}

void print_human(const Report& rep) {
    std::cout << "method: " << rep.method << "   response: " << rep.response
              << "   tail: " << rep.tail << "   alpha: " << rep.alpha << "   df: ";
    if (std::isfinite(rep.df)) std::cout << rep.df;
    else std::cout << "asymptotic";
    std::cout << "   critical value: " << std::setprecision(4) << rep.critical_value << "\n";
    if (rep.tail == "two-sided")
        std::cout << "note: two-sided by default; one-sided alternatives are often more "
                     "appropriate for dose studies (--tail greater|less)\n";
    std::cout << std::left << std::setw(24) << "comparison" << std::right << std::setw(12)
              << "estimate" << std::setw(12) << "se" << std::setw(10) << "stat" << std::setw(12)
              << "adj p" << std::setw(12) << "lower" << std::setw(12) << "upper";
    if (rep.has_or) std::cout << std::setw(12) << "OR" << std::setw(12) << "OR lower";
    std::cout << "\n";
    std::cout << std::setprecision(4) << std::fixed;
    for (std::size_t j = 0; j < rep.rows.size(); ++j) {
        const auto& r = rep.rows[j];
        std::cout << std::left << std::setw(24) << r.comparison << std::right << std::setw(12)
                  << r.estimate << std::setw(12) << r.se << std::setw(10) << r.stat
                  << std::setw(12) << r.p_adj << std::setw(12) << r.lower << std::setw(12)
                  << r.upper;
        if (rep.has_or)
            std::cout << std::setw(12) << rep.odds_ratio[j] << std::setw(12) << rep.or_lower[j];
        std::cout << "\n";
    }
    std::cout.unsetf(std::ios::fixed);
    std::cout << std::setprecision(6);
}

void print_csv(const Report& rep) {
    std::cout << std::setprecision(15);
    std::cout << "method,response,comparison,estimate,se,stat,adj_p,lower,upper,df,alpha,tail";
    if (rep.has_or) std::cout << ",odds_ratio,or_lower,or_upper";
    std::cout << "\n";
    for (std::size_t j = 0; j < rep.rows.size(); ++j) {
        const auto& r = rep.rows[j];
        std::cout << rep.method << "," << rep.response << "," << r.comparison << ","
                  << r.estimate << "," << r.se << "," << r.stat << "," << r.p_adj << ","
                  << r.lower << "," << r.upper << "," << rep.df << "," << rep.alpha << ","
                  << rep.tail;
        if (rep.has_or)
            std::cout << "," << rep.odds_ratio[j] << "," << rep.or_lower[j] << ","
                      << rep.or_upper[j];
        std::cout << "\n";
    }
}

void print_json(const Report& rep) {
    json out;
    out["method"] = rep.method;
    out["response"] = rep.response;
    out["df"] = std::isfinite(rep.df) ? json(rep.df) : json(nullptr);
    out["alpha"] = rep.alpha;
    out["tail"] = rep.tail;
    out["critical_value"] = rep.critical_value;
    out["comparisons"] = json::array();
    for (std::size_t j = 0; j < rep.rows.size(); ++j) {
        const auto& r = rep.rows[j];
        json row = {{"comparison", r.comparison}, {"estimate", r.estimate},
                    {"se", r.se},                 {"stat", r.stat},
                    {"adj_p", r.p_adj},           {"lower", r.lower},
                    {"upper", r.upper}};
        if (rep.has_or) {
            row["odds_ratio"] = rep.odds_ratio[j];
            row["or_lower"] = rep.or_lower[j];
            row["or_upper"] = rep.or_upper[j];
        }
        out["comparisons"].push_back(row);
    }
    std::cout << out.dump(2) << "\n";
}

void emit(const CommonOpts& o, const Report& rep) {
    if (o.format == "csv") print_csv(rep);
    else if (o.format == "json") print_json(rep);
    else print_human(rep);
}

MvtOptions mvt_options(const CommonOpts& o) {
    MvtOptions opts;
    opts.seed = o.seed;
    return opts;
}

std::optional<double> mlt_df(const CommonOpts& o, const GroupedSample& s) {
    if (o.df_mode == "asymptotic") return std::nullopt;
    return static_cast<double>(s.total_n() - s.num_groups());
}

int run_analysis(const std::string& method, CommonOpts& o) {
    if (!o.config_file.empty()) apply_config_file(o);
    const Tail tail = parse_tail(o.tail);
    const auto samples = load(o);
    emit_plot_data(o, samples);

    if (method == "mmm") {
        if (samples.size() < 2)
            throw CLI::ValidationError("mmm needs at least two --response columns");
        std::vector<TransformationModel> models;
        MltOptions mopts;
        mopts.order = o.order;
        for (const auto& s : samples) models.push_back(fit_mlt(s, mopts));
        std::vector<std::string> comparisons;
        for (int g = 1; g < samples[0].num_groups(); ++g)
            comparisons.push_back(samples[0].group(g).label + " / " +
                                  samples[0].group(0).label);
        const auto stacked = stack_models(models, o.responses, comparisons);
        const auto res = mmm_dunnett(stacked, tail, o.alpha, mvt_options(o));
        std::string joint;
        for (const auto& r : o.responses) joint += (joint.empty() ? "" : "+") + r;
        emit(o, report_from(res, "mmm", joint, o.tail));
        return 0;
    }

    int exit_code = 0;
    for (std::size_t r = 0; r < samples.size(); ++r) {
        const GroupedSample& s = samples[r];
        const auto contrasts = dunnett_contrasts(s);
        Report rep;
        if (method == "dunnett") {
            rep = report_from(max_t_test(s, contrasts, PooledMethod{}, tail, o.alpha,
                                         mvt_options(o)),
                              method, o.responses[r], o.tail);
        } else if (method == "satterthwaite") {
            rep = report_from(max_t_test(s, contrasts, SatterthwaiteMethod{}, tail, o.alpha,
                                         mvt_options(o)),
                              method, o.responses[r], o.tail);
        } else if (method == "sandwich") {
            SandwichMethod sm;
            if (o.df_mode == "linear-model")
                sm.df = static_cast<double>(s.total_n() - s.num_groups());
            rep = report_from(max_t_test(s, contrasts, sm, tail, o.alpha, mvt_options(o)),
                              method, o.responses[r], o.tail);
        } else if (method == "robust") {
            rep = report_from(robust_dunnett(s, {}, tail, o.alpha, mvt_options(o)), method,
                              o.responses[r], o.tail);
        } else if (method == "npar") {
            rep = report_from(npar_dunnett(s, tail, o.alpha, EffectScale::Probit,
                                           mvt_options(o)),
                              method, o.responses[r], o.tail);
        } else if (method == "mlt") {
            MltOptions mopts;
            mopts.order = o.order;
            const auto model = fit_mlt(s, mopts);
            std::vector<std::string> labels;
            for (int g = 1; g < s.num_groups(); ++g)
                labels.push_back(s.group(g).label + " / " + s.group(0).label);
            rep = report_from(mlt_dunnett(model, mlt_df(o, s), tail, o.alpha, mvt_options(o),
                                          labels),
                              method, o.responses[r], o.tail);
        } else if (method == "colr") {
            const auto colr = colr_dunnett(s, o.order, tail, o.alpha, mlt_df(o, s),
                                           mvt_options(o));
            rep = report_from(colr.wald, method, o.responses[r], o.tail);
            rep.has_or = true;
            for (int j = 0; j < colr.odds_ratio.size(); ++j) {
                rep.odds_ratio.push_back(colr.odds_ratio(j));
                rep.or_lower.push_back(colr.or_lower(j));
                rep.or_upper.push_back(colr.or_upper(j));
            }
        } else {
            throw CLI::ValidationError("unknown method " + method);
        }
        emit(o, rep);
        if (samples.size() > 1 && o.format == "human" && r + 1 < samples.size())
            std::cout << "\n";
    }
    return exit_code;
}

struct SimOpts {
    int runs = 10000;
    std::uint64_t seed = kDefaultSeed;
    std::vector<std::string> procedures;
    std::vector<std::string> rows;
    int threads = 0;
    std::string format = "csv";
    std::string output;
};

int run_sim(const SimOpts& so) {
    Table4Config cfg;
    cfg.runs = so.runs;
    cfg.seed = so.seed;
    cfg.threads = so.threads;
    cfg.row_filter = so.rows;
    if (!so.procedures.empty()) {
        cfg.procedures.clear();
        for (const auto& p : so.procedures) cfg.procedures.push_back(procedure_from_string(p));
    }
    const auto results = table4(cfg);
    const std::string csv = sim_results_csv(results);
    if (!so.output.empty()) {
        std::ofstream out(so.output);
        out << csv;
    }
    if (so.format == "human") {
        std::cout << std::left << std::setw(26) << "scenario" << std::setw(6) << "proc"
                  << std::right << std::setw(12) << "proportion" << std::setw(10) << "mcse"
                  << std::setw(10) << "failures" << "\n";
        std::cout << std::setprecision(4) << std::fixed;
        for (const auto& r : results)
            for (const auto& o : r.outcomes)
                std::cout << std::left << std::setw(26) << r.scenario.id << std::setw(6)
                          << to_string(o.procedure) << std::right << std::setw(12)
                          << o.proportion() << std::setw(10) << o.mcse() << std::setw(10)
                          << o.failures << "\n";
    } else {
        std::cout << csv;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust Dunnett-type multiple comparisons against a control"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);  // usage errors list the subcommands

    CommonOpts opts;
    SimOpts sim_opts;
    const std::vector<std::string> methods = {"dunnett", "satterthwaite", "sandwich", "robust",
                                              "npar",    "mlt",           "colr",     "mmm"};
    const std::vector<std::string> help = {
        "classical pooled-variance Dunnett test",
        "heteroscedastic Dunnett test with Satterthwaite df",
        "Dunnett test with HC3 sandwich covariance",
        "Dunnett test on robust M-estimates (Huber)",
        "nonparametric relative-effect (Brunner-Munzel) comparisons",
        "most-likely-transformation Dunnett test (Bernstein basis)",
        "continuous outcome logistic regression: odds ratios vs control",
        "joint transformation-model inference over several endpoints"};
    std::string chosen;
    for (std::size_t m = 0; m < methods.size(); ++m) {
        auto* cmd = app.add_subcommand(methods[m], help[m]);
        add_common(cmd, opts);
        cmd->callback([&chosen, name = methods[m]] { chosen = name; });
    }

    auto* sim = app.add_subcommand("sim", "size/power simulation grid");
    sim->add_option("--runs", sim_opts.runs, "replicates per scenario")->check(CLI::Range(100, 10000000));
    sim->add_option("--seed", sim_opts.seed, "master seed");
    sim->add_option("--procedures", sim_opts.procedures,
                    "procedures to simulate (dun sat saw rob mlt rel)");
    sim->add_option("--rows", sim_opts.rows, "scenario-id substrings to keep");
    sim->add_option("--threads", sim_opts.threads, "worker threads (0: all, capped by ROBUST_MCT_THREADS)");
    sim->add_option("-f,--format", sim_opts.format, "human | csv")
        ->check(CLI::IsMember({"human", "csv"}));
    sim->add_option("-o,--output", sim_opts.output, "also write the CSV to this path");
    sim->callback([&chosen] { chosen = "sim"; });

    CLI11_PARSE(app, argc, argv);
    try {
        if (chosen == "sim") return run_sim(sim_opts);
        return run_analysis(chosen, opts);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
