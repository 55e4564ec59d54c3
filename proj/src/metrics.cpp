#include "signas/metrics.hpp"

#include <algorithm>
#include <limits>
#include <istream>
#include <numeric>
#include <ostream>

#include "signas/error.hpp"
#include "text.hpp"

namespace signas {

ConfusionMatrix::ConfusionMatrix(std::size_t classes)
    : classes_(classes), counts_(classes * classes, 0) {
    if (classes < 2) throw DomainError("confusion matrix needs at least 2 classes");
}

ConfusionMatrix::ConfusionMatrix(std::size_t classes, std::vector<std::uint64_t> row_major)
    : classes_(classes), counts_(std::move(row_major)) {
    if (classes < 2) throw DomainError("confusion matrix needs at least 2 classes");
    if (counts_.size() != classes * classes) {
        throw DomainError("confusion matrix expects " + std::to_string(classes * classes) +
                          " counts, got " + std::to_string(counts_.size()));
    }
}

ConfusionMatrix ConfusionMatrix::from_predictions(std::size_t classes, std::span<const int> truth,
                                                  std::span<const int> predicted) {
    if (truth.size() != predicted.size()) {
        throw DomainError("truth and prediction lengths differ");
    }
    ConfusionMatrix cm(classes);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || predicted[i] < 0) throw DomainError("negative class label");
        cm.add(static_cast<std::size_t>(truth[i]), static_cast<std::size_t>(predicted[i]));
    }
    return cm;
}

std::uint64_t ConfusionMatrix::at(std::size_t truth, std::size_t predicted) const {
    if (truth >= classes_ || predicted >= classes_) throw DomainError("class index out of range");
    return counts_[truth * classes_ + predicted];
}

std::uint64_t& ConfusionMatrix::at(std::size_t truth, std::size_t predicted) {
    if (truth >= classes_ || predicted >= classes_) throw DomainError("class index out of range");
    return counts_[truth * classes_ + predicted];
}

std::uint64_t ConfusionMatrix::total() const noexcept {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::trace() const noexcept {
    std::uint64_t t = 0;
    for (std::size_t c = 0; c < classes_; ++c) t += counts_[c * classes_ + c];
    return t;
}

std::uint64_t ConfusionMatrix::true_positives(std::size_t c) const { return at(c, c); }

std::uint64_t ConfusionMatrix::false_positives(std::size_t c) const {
    std::uint64_t n = 0;
    for (std::size_t t = 0; t < classes_; ++t) {
        if (t != c) n += at(t, c);
    }
    return n;
}

std::uint64_t ConfusionMatrix::false_negatives(std::size_t c) const {
    std::uint64_t n = 0;
    for (std::size_t p = 0; p < classes_; ++p) {
        if (p != c) n += at(c, p);
    }
    return n;
}

std::uint64_t ConfusionMatrix::true_negatives(std::size_t c) const {
    return total() - true_positives(c) - false_positives(c) - false_negatives(c);
}

double accuracy(const ConfusionMatrix& cm) {
    const auto total = cm.total();
    if (total == 0) throw DomainError("accuracy of an empty confusion matrix");
    return static_cast<double>(cm.trace()) / static_cast<double>(total);
}

ClassMetrics precision_recall_f1(const ConfusionMatrix& cm, std::size_t cls) {
    if (cls >= cm.classes()) throw DomainError("class index out of range");
    const auto tp = static_cast<double>(cm.true_positives(cls));
    const auto fp = static_cast<double>(cm.false_positives(cls));
    const auto fn = static_cast<double>(cm.false_negatives(cls));

    ClassMetrics m;
    m.label = std::to_string(cls);
    if (tp + fp > 0) m.precision = tp / (tp + fp);
    else m.degenerate = true;
    if (tp + fn > 0) m.recall = tp / (tp + fn);
    else m.degenerate = true;
    if (m.precision + m.recall > 0) {
        m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
    } else {
        m.degenerate = true;
    }
    return m;
}

QualityReport make_report(const ConfusionMatrix& cm, std::span<const std::string> labels) {
    if (!labels.empty() && labels.size() != cm.classes()) {
        throw DomainError("label count does not match confusion matrix");
    }
    QualityReport report;
    report.accuracy = accuracy(cm);
    for (std::size_t c = 0; c < cm.classes(); ++c) {
        auto m = precision_recall_f1(cm, c);
        if (!labels.empty()) m.label = labels[c];
        report.per_class.push_back(std::move(m));
    }
    return report;
}

RocCurve roc_curve(std::span<const double> scores, std::span<const bool> positive) {
    if (scores.size() != positive.size()) throw DomainError("scores and labels lengths differ");
    const auto pos = static_cast<std::size_t>(std::count(positive.begin(), positive.end(), true));
    const std::size_t neg = positive.size() - pos;
    if (pos == 0 || neg == 0) {
        throw DomainError("ROC needs at least one positive and one negative sample");
    }

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::size_t tp = 0;
    std::size_t fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double threshold = scores[order[i]];
        while (i < order.size() && scores[order[i]] == threshold) {
            if (positive[order[i]]) ++tp;
            else ++fp;
            ++i;
        }
        curve.points.push_back({threshold, static_cast<double>(fp) / static_cast<double>(neg),
                                static_cast<double>(tp) / static_cast<double>(pos)});
    }
    for (std::size_t i = 1; i < curve.points.size(); ++i) {
        const auto& a = curve.points[i - 1];
        const auto& b = curve.points[i];
        curve.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) * 0.5;
    }
    return curve;
}

void write_metrics_csv(std::ostream& out, const QualityReport& report) {
    out << "accuracy," << text::number(report.accuracy) << '\n';
    out << "class,precision,recall,f1\n";
    for (const auto& m : report.per_class) {
        out << m.label << ',' << text::number(m.precision) << ',' << text::number(m.recall) << ','
            << text::number(m.f1) << '\n';
    }
}

void write_roc_csv(std::ostream& out, std::span<const ClassRoc> curves) {
    out << "class,threshold,fpr,tpr\n";
    for (const auto& c : curves) {
        for (const auto& p : c.curve.points) {
            out << c.label << ',' << text::number(p.threshold) << ',' << text::number(p.fpr) << ','
                << text::number(p.tpr) << '\n';
        }
    }
}

LabeledMatrix read_confusion_csv(std::istream& in) {
    std::vector<std::string> labels;
    std::vector<std::vector<std::uint64_t>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto trimmed = text::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        auto fields = text::split(trimmed, ',');
        std::vector<std::uint64_t> row;
        bool numeric = true;
        for (auto f : fields) {
            std::uint64_t v = 0;
            if (!text::parse(f, v)) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (rows.empty() && labels.empty()) {
                for (auto f : fields) labels.emplace_back(text::trim(f));
                continue;
            }
            throw ParseError(lineno, "non-integer count in confusion matrix");
        }
        rows.push_back(std::move(row));
    }
    const std::size_t n = rows.size();
    if (n < 2) throw FormatError("confusion matrix needs at least 2 rows");
    std::vector<std::uint64_t> flat;
    for (std::size_t r = 0; r < n; ++r) {
        if (rows[r].size() != n) throw FormatError("confusion matrix must be square");
        flat.insert(flat.end(), rows[r].begin(), rows[r].end());
    }
    if (!labels.empty() && labels.size() != n) throw FormatError("label row width mismatch");
    return {ConfusionMatrix(n, std::move(flat)), std::move(labels)};
}

}  // namespace signas
