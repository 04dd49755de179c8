#include "flexsched/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace flexsched {

std::string format_number(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", value);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        raise(ErrorCode::io_error, "cannot write '" + path + "'");
    }
    return out;
}

void write_proposals_csv(const RunReport& report, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "device,date,t_es,chosen_t,delay,delta_spot,delta_reg,acceptance_prob,outcome\n";
    for (const ProposalRecord& p : report.proposals) {
        out << p.device_id << ',' << format_date(p.date) << ',' << p.reference_t_es
            << ',' << p.chosen_t << ',' << format_number(p.delay) << ','
            << format_number(p.delta_spot) << ',' << format_number(p.delta_reg) << ','
            << format_number(p.acceptance_prob) << ','
            << (p.accepted ? "accepted" : "rejected") << '\n';
    }
    if (!out) {
        raise(ErrorCode::io_error, "write failed for '" + path + "'");
    }
}

Json experiment_to_json(const ExperimentReport& experiment) {
    Json j;
    j["kind"] = "experiment_report";
    j["name"] = experiment.name;
    Json runs = Json::array();
    for (const ExperimentRun& run : experiment.runs) {
        Json r;
        r["arm"] = run.arm;
        r["param"] = round9(run.param);
        r["shuffle"] = run.shuffle;
        r["report"] = run_report_to_json(run.report);
        runs.push_back(r);
    }
    j["runs"] = runs;
    return j;
}

void write_experiment_csv(const ExperimentReport& experiment, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "arm,param,shuffle,acceptance_rate,spot_savings_pct,reg_savings_pct,"
           "day_accuracy,hour_rmse,n_proposals,n_accepted,total_spot_savings,"
           "total_reg_savings,mean_lambda\n";
    for (const ExperimentRun& run : experiment.runs) {
        const RunReport& r = run.report;
        out << run.arm << ',' << format_number(run.param) << ',' << run.shuffle << ','
            << format_number(r.acceptance_rate) << ','
            << format_number(r.spot_savings_pct) << ','
            << format_number(r.reg_savings_pct) << ','
            << format_number(r.day_accuracy) << ',' << format_number(r.hour_rmse) << ','
            << r.n_proposals << ',' << r.n_accepted << ','
            << format_number(r.total_spot_savings) << ','
            << format_number(r.total_reg_savings) << ','
            << format_number(r.mean_lambda) << '\n';
    }
    if (!out) {
        raise(ErrorCode::io_error, "write failed for '" + path + "'");
    }
}

}  // namespace

void write_report(const RunReport& report, const std::string& stem) {
    write_json_file(run_report_to_json(report), stem + ".json");
    write_proposals_csv(report, stem + ".csv");
}

void write_comparison_bundle(const ComparisonBundle& bundle,
                             const std::string& directory) {
    std::error_code ec;
    std::filesystem::create_directories(directory, ec);
    if (ec) {
        raise(ErrorCode::io_error, "cannot create directory '" + directory + "'");
    }
    const std::string base = directory + "/";

    write_json_file(experiment_to_json(bundle.flexibility_models),
                    base + "uniform_vs_adaptive.json");
    write_experiment_csv(bundle.flexibility_models, base + "uniform_vs_adaptive.csv");

    write_json_file(experiment_to_json(bundle.ideal_vs_predicted),
                    base + "ideal_vs_predicted.json");
    write_experiment_csv(bundle.ideal_vs_predicted, base + "ideal_vs_predicted.csv");

    write_json_file(experiment_to_json(bundle.standard_vs_probabilistic),
                    base + "standard_vs_probabilistic.json");
    write_experiment_csv(bundle.standard_vs_probabilistic,
                         base + "standard_vs_probabilistic.csv");

    // Prediction-level comparison: flat table, JSON + CSV.
    Json pred;
    pred["kind"] = "prediction_levels";
    Json rows = Json::array();
    for (const PredictionComparisonRow& row : bundle.prediction_levels) {
        rows.push_back({{"model", row.model},
                        {"scope", row.scope},
                        {"rep", row.rep},
                        {"day_accuracy", round9(row.day_accuracy)},
                        {"hour_rmse", round9(row.hour_rmse)}});
    }
    pred["rows"] = rows;
    write_json_file(pred, base + "prediction_levels.json");
    {
        std::ofstream out = open_out(base + "prediction_levels.csv");
        out << "model,scope,rep,day_accuracy,hour_rmse\n";
        for (const PredictionComparisonRow& row : bundle.prediction_levels) {
            out << row.model << ',' << row.scope << ',' << row.rep << ','
                << format_number(row.day_accuracy) << ','
                << format_number(row.hour_rmse) << '\n';
        }
    }

    // Headline means per experiment arm.
    Json summary;
    summary["kind"] = "comparison_summary";
    auto arm_summary = [](const ExperimentReport& experiment) {
        Json arms = Json::array();
        std::vector<std::pair<std::string, double>> seen;
        for (const ExperimentRun& run : experiment.runs) {
            bool found = false;
            for (const auto& [arm, param] : seen) {
                if (arm == run.arm && param == run.param) {
                    found = true;
                    break;
                }
            }
            if (!found) seen.emplace_back(run.arm, run.param);
        }
        for (const auto& [arm, param] : seen) {
            double acceptance = 0.0, spot = 0.0, reg = 0.0;
            int count = 0;
            for (const ExperimentRun& run : experiment.runs) {
                if (run.arm != arm || run.param != param) continue;
                acceptance += run.report.acceptance_rate;
                spot += run.report.spot_savings_pct;
                reg += run.report.reg_savings_pct;
                ++count;
            }
            arms.push_back({{"arm", arm},
                            {"param", round9(param)},
                            {"runs", count},
                            {"acceptance_rate", round9(acceptance / count)},
                            {"spot_savings_pct", round9(spot / count)},
                            {"reg_savings_pct", round9(reg / count)}});
        }
        return arms;
    };
    summary["uniform_vs_adaptive"] = arm_summary(bundle.flexibility_models);
    summary["ideal_vs_predicted"] = arm_summary(bundle.ideal_vs_predicted);
    summary["standard_vs_probabilistic"] = arm_summary(bundle.standard_vs_probabilistic);
    write_json_file(summary, base + "summary.json");
}

}  // namespace flexsched
