#include "mirspec/protocol.hpp"

#include <cmath>
#include <cstdio>

#include "nlohmann/json.hpp"

#include "mirspec/parallel.hpp"
#include "mirspec/rng.hpp"

namespace mirspec {

MethodSpec method_from_spec(const std::string& name, ClassifierSpec spec) {
    return {name, [spec](const SpectraTable& train, std::uint64_t seed) {
                ClassifierSpec seeded = spec;
                seeded.seed = seed;
                return fit(seeded, train);
            }};
}

namespace {

SpectraTable subset_rows(const SpectraTable& table,
                         const std::vector<std::size_t>& rows) {
    SpectraTable out;
    out.axis = table.axis;
    out.mode = table.mode;
    out.rows.reserve(rows.size());
    out.values.reserve(rows.size() * table.channels());
    for (std::size_t r : rows) out.append_row(table.rows[r], table.spectrum(r));
    return out;
}

}  // namespace

ProtocolResult run_protocol(const SpectraTable& table,
                            const SplitResult& splits,
                            const std::vector<MethodSpec>& methods,
                            std::uint64_t seed, unsigned threads) {
    table.validate();
    if (methods.empty()) throw Error("bad-input", "no methods to evaluate");
    if (splits.repeats.empty()) throw Error("bad-input", "no splits");

    const std::size_t n_repeats = splits.repeats.size();
    const std::size_t n_methods = methods.size();

    ProtocolResult result;
    result.report.repeats = static_cast<int>(n_repeats);
    result.report.methods.resize(n_methods);
    for (std::size_t m = 0; m < n_methods; ++m) {
        result.report.methods[m].name = methods[m].name;
        result.report.methods[m].per_repeat.resize(n_repeats);
    }

    // one task per (repeat, method); outputs keyed by the task index
    parallel_for(n_repeats * n_methods, threads, [&](std::size_t task) {
        const std::size_t rep = task / n_methods;
        const std::size_t m = task % n_methods;
        const auto& split = splits.repeats[rep];
        auto& outcome = result.report.methods[m].per_repeat[rep];
        try {
            const SpectraTable train = subset_rows(table, split.train_rows);
            const SpectraTable test = subset_rows(table, split.test_rows);
            const auto model = methods[m].make(
                train, derive_seed(seed, rep * n_methods + m));
            const auto scores = model->predict_score(test);
            const auto labels = binary_labels(test);

            outcome.cm = confusion(scores, labels);
            const auto basic = metrics(outcome.cm);
            outcome.accuracy = basic.accuracy;
            outcome.sensitivity = basic.sensitivity;
            outcome.specificity = basic.specificity;
            outcome.auc = auc(scores, labels);
            if (rep == 0) {
                result.report.methods[m].first_scores = scores;
                result.report.methods[m].first_labels = labels;
            }
        } catch (const Error& e) {
            outcome.failure = std::string(e.code()) + ": " + e.what();
        }
    });

    // ACC matrix over the methods that succeeded everywhere
    std::vector<std::size_t> complete;
    for (std::size_t m = 0; m < n_methods; ++m) {
        bool ok = true;
        for (const auto& rep : result.report.methods[m].per_repeat)
            if (!rep.failure.empty() || !rep.accuracy) ok = false;
        if (ok) complete.push_back(m);
    }
    if (complete.size() >= 2) {
        result.acc_matrix.n_rows = n_repeats;
        for (std::size_t m : complete)
            result.acc_matrix.methods.push_back(methods[m].name);
        for (std::size_t rep = 0; rep < n_repeats; ++rep)
            for (std::size_t m : complete)
                result.acc_matrix.values.push_back(
                    *result.report.methods[m].per_repeat[rep].accuracy);
    }
    return result;
}

Summary EvalReport::summary(std::size_t method,
                            std::optional<double> RepeatOutcome::*metric) const {
    Summary s;
    std::vector<double> values;
    for (const auto& rep : methods[method].per_repeat) {
        if (!rep.failure.empty()) continue;
        if (const auto& v = rep.*metric) values.push_back(*v);
    }
    if (values.empty()) return s;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    s.mean = mean;
    if (values.size() >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - mean) * (v - mean);
        s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

namespace {

nlohmann::ordered_json opt_json(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

}  // namespace

nlohmann::ordered_json report_to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["repeats"] = report.repeats;
    auto arr = nlohmann::ordered_json::array();
    for (std::size_t m = 0; m < report.methods.size(); ++m) {
        const auto& method = report.methods[m];
        nlohmann::ordered_json mj;
        mj["name"] = method.name;

        nlohmann::ordered_json summary;
        const struct {
            const char* key;
            std::optional<double> RepeatOutcome::*member;
        } fields[] = {{"acc", &RepeatOutcome::accuracy},
                      {"auc", &RepeatOutcome::auc},
                      {"sensitivity", &RepeatOutcome::sensitivity},
                      {"specificity", &RepeatOutcome::specificity}};
        for (const auto& f : fields) {
            const auto s = report.summary(m, f.member);
            summary[f.key]["mean"] = opt_json(s.mean);
            summary[f.key]["std"] = opt_json(s.stddev);
        }
        mj["summary"] = std::move(summary);

        auto reps = nlohmann::ordered_json::array();
        for (const auto& rep : method.per_repeat) {
            nlohmann::ordered_json rj;
            rj["acc"] = opt_json(rep.accuracy);
            rj["auc"] = opt_json(rep.auc);
            rj["sensitivity"] = opt_json(rep.sensitivity);
            rj["specificity"] = opt_json(rep.specificity);
            rj["confusion"] = {{"tp", rep.cm.tp},
                               {"fp", rep.cm.fp},
                               {"tn", rep.cm.tn},
                               {"fn", rep.cm.fn}};
            if (!rep.failure.empty()) rj["failure"] = rep.failure;
            reps.push_back(std::move(rj));
        }
        mj["per_repeat"] = std::move(reps);
        arr.push_back(std::move(mj));
    }
    j["methods"] = std::move(arr);
    return j;
}

std::string report_to_csv(const EvalReport& report) {
    std::string out = "Methods,ACC,AUC,Sensitivity,Specificity\n";
    char buf[64];
    for (std::size_t m = 0; m < report.methods.size(); ++m) {
        out += report.methods[m].name;
        std::optional<double> RepeatOutcome::*const fields[] = {
            &RepeatOutcome::accuracy, &RepeatOutcome::auc,
            &RepeatOutcome::sensitivity, &RepeatOutcome::specificity};
        for (const auto& field : fields) {
            const auto s = report.summary(m, field);
            out += ',';
            if (s.mean && s.stddev) {
                std::snprintf(buf, sizeof buf, "%.4f +- %.4f", *s.mean,
                              *s.stddev);
                out += buf;
            } else if (s.mean) {
                std::snprintf(buf, sizeof buf, "%.4f", *s.mean);
                out += buf;
            } else {
                out += "undefined";
            }
        }
        out += '\n';
    }
    return out;
}

}  // namespace mirspec
