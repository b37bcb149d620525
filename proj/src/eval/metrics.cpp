#include "bsid/eval/metrics.hpp"

#include <charconv>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "bsid/error.hpp"

namespace bsid::eval {
namespace {

std::string real(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double ratio(std::uint64_t num, std::uint64_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

} // namespace

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}); }

ConfusionMatrix confusion_matrix(std::span<const std::uint16_t> predictions, std::span<const std::uint16_t> truths,
                                 std::size_t classes) {
    if (predictions.size() != truths.size()) {
        throw Error(ErrorCode::LengthMismatch, std::to_string(predictions.size()) + " predictions for " +
                                                   std::to_string(truths.size()) + " labels");
    }
    ConfusionMatrix cm(classes);
    for (std::size_t i = 0; i < truths.size(); ++i) {
        if (truths[i] >= classes || predictions[i] >= classes) {
            throw Error(ErrorCode::ClassOutOfRange, "record " + std::to_string(i) + " has class " +
                                                        std::to_string(std::max(truths[i], predictions[i])) +
                                                        " of " + std::to_string(classes));
        }
        ++cm.at(truths[i], predictions[i]);
    }
    return cm;
}

MetricsReport macro_metrics(const ConfusionMatrix& cm) {
    MetricsReport r;
    const std::size_t n = cm.classes;
    r.classes.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
        std::uint64_t predicted = 0, actual = 0;
        for (std::size_t k = 0; k < n; ++k) {
            predicted += cm.at(k, c);
            actual += cm.at(c, k);
        }
        const std::uint64_t tp = cm.at(c, c);
        auto& m = r.classes[c];
        m.support = actual;
        m.precision = ratio(tp, predicted);
        m.recall = ratio(tp, actual);
        // 2TP / (2TP + FP + FN) is the harmonic mean without the 0/0 corner
        m.f1 = ratio(2 * tp, predicted + actual);
        r.macro_precision += m.precision;
        r.macro_recall += m.recall;
        r.macro_f1 += m.f1;
    }
    if (n > 0) {
        r.macro_precision /= static_cast<double>(n);
        r.macro_recall /= static_cast<double>(n);
        r.macro_f1 /= static_cast<double>(n);
    }
    return r;
}

std::string format_metrics_file(const MetricsReport& report, const ConfusionMatrix& cm) {
    std::ostringstream out;
    out << "macro_precision=" << real(report.macro_precision) << '\n'
        << "macro_recall=" << real(report.macro_recall) << '\n'
        << "macro_f1=" << real(report.macro_f1) << '\n';
    for (std::size_t c = 0; c < report.classes.size(); ++c) {
        const auto& m = report.classes[c];
        const std::string key = "class_" + std::to_string(c) + "_";
        out << key << "precision=" << real(m.precision) << '\n'
            << key << "recall=" << real(m.recall) << '\n'
            << key << "f1=" << real(m.f1) << '\n'
            << key << "support=" << m.support << '\n';
    }
    for (std::size_t t = 0; t < cm.classes; ++t) {
        for (std::size_t p = 0; p < cm.classes; ++p) {
            out << (p ? " " : "") << cm.at(t, p);
        }
        out << '\n';
    }
    return out.str();
}

std::string format_report(const MetricsReport& report, const ConfusionMatrix& cm,
                          std::span<const std::string> class_names) {
    std::size_t width = 5;
    for (const auto& n : class_names) {
        width = std::max(width, n.size());
    }
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-*s %9s %9s %9s %9s\n", static_cast<int>(width), "class", "precision", "recall",
                  "f1", "support");
    out << buf;
    for (std::size_t c = 0; c < report.classes.size(); ++c) {
        const auto& m = report.classes[c];
        const std::string name = c < class_names.size() ? class_names[c] : std::to_string(c);
        std::snprintf(buf, sizeof buf, "%-*s %9.4f %9.4f %9.4f %9llu\n", static_cast<int>(width), name.c_str(),
                      m.precision, m.recall, m.f1, static_cast<unsigned long long>(m.support));
        out << buf;
    }
    std::snprintf(buf, sizeof buf, "%-*s %9.4f %9.4f %9.4f %9llu\n", static_cast<int>(width), "macro",
                  report.macro_precision, report.macro_recall, report.macro_f1,
                  static_cast<unsigned long long>(cm.total()));
    out << buf << "\nconfusion matrix (rows: true, columns: predicted)\n";
    for (std::size_t t = 0; t < cm.classes; ++t) {
        for (std::size_t p = 0; p < cm.classes; ++p) {
            out << (p ? " " : "") << cm.at(t, p);
        }
        out << '\n';
    }
    return out.str();
}

} // namespace bsid::eval
