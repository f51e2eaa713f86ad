#include "byzsgd/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace byzsgd {

std::string format_double(double x) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

namespace {

void append_record(std::ostringstream& out, const MetricsRecord& rec, bool include_timing) {
    out << rec.round << ',' << format_double(rec.train_loss) << ','
        << format_double(rec.eval_metric) << ',' << format_double(rec.grad_norm) << ','
        << format_double(include_timing ? rec.agg_wall_time : 0.0) << '\n';
}

}  // namespace

std::string metrics_to_csv(const std::vector<MetricsRecord>& records, bool include_timing) {
    std::ostringstream out;
    out << kMetricsCsvHeader << '\n';
    for (const MetricsRecord& rec : records) append_record(out, rec, include_timing);
    return out.str();
}

std::string averaged_metrics_to_csv(const std::vector<std::vector<MetricsRecord>>& replicates,
                                    bool include_timing) {
    require(!replicates.empty(), "averaged csv: need at least one replicate");
    const std::size_t rows = replicates.front().size();
    for (const auto& rep : replicates)
        require(rep.size() == rows, "averaged csv: replicates disagree on round schedule");

    std::ostringstream out;
    out << kAveragedCsvHeader << '\n';
    const double r = static_cast<double>(replicates.size());
    for (std::size_t row = 0; row < rows; ++row) {
        double mean[4] = {0, 0, 0, 0};
        double m2[4] = {0, 0, 0, 0};
        const int round = replicates.front()[row].round;
        for (const auto& rep : replicates) {
            require(rep[row].round == round, "averaged csv: replicates disagree on rounds");
            const double vals[4] = {rep[row].train_loss, rep[row].eval_metric,
                                    rep[row].grad_norm,
                                    include_timing ? rep[row].agg_wall_time : 0.0};
            for (int k = 0; k < 4; ++k) {
                mean[k] += vals[k];
                m2[k] += vals[k] * vals[k];
            }
        }
        double stddev[4];
        for (int k = 0; k < 4; ++k) {
            mean[k] /= r;
            const double var = r > 1.0 ? std::max(0.0, (m2[k] - r * mean[k] * mean[k]) / (r - 1.0))
                                       : 0.0;
            stddev[k] = std::sqrt(var);
        }
        out << round;
        for (int k = 0; k < 4; ++k) out << ',' << format_double(mean[k]);
        for (int k = 0; k < 4; ++k) out << ',' << format_double(stddev[k]);
        out << '\n';
    }
    return out.str();
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("csv: cannot open \"" + tmp + "\" for writing");
        out << contents;
        if (!out.flush()) throw std::runtime_error("csv: write to \"" + tmp + "\" failed");
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace byzsgd
