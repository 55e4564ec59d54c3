#include <memory>
#include <sstream>

#include "../oracles.hpp"
#include "doctest.h"
#include "signas/error.hpp"
#include "signas/metrics.hpp"
#include "signas/rng.hpp"

using namespace signas;

TEST_SUITE("metrics") {

TEST_CASE("hand example") {
    // class 0 positive: TP=50, FN=10, FP=5, TN=35
    ConfusionMatrix cm(2, {50, 10, 5, 35});
    CHECK(cm.true_positives(0) == 50);
    CHECK(cm.false_negatives(0) == 10);
    CHECK(cm.false_positives(0) == 5);
    CHECK(cm.true_negatives(0) == 35);
    CHECK(accuracy(cm) == doctest::Approx(0.85).epsilon(1e-12));
    auto m = precision_recall_f1(cm, 0);
    CHECK(m.precision == doctest::Approx(0.9091).epsilon(1e-4));
    CHECK(m.recall == doctest::Approx(0.8333).epsilon(1e-4));
    CHECK(m.f1 == doctest::Approx(0.8696).epsilon(1e-4));
    CHECK_FALSE(m.degenerate);
}

TEST_CASE("edge matrices") {
    CHECK(accuracy(ConfusionMatrix(3, {4, 0, 0, 0, 5, 0, 0, 0, 6})) == 1.0);
    CHECK(accuracy(ConfusionMatrix(2, {0, 3, 4, 0})) == 0.0);
    CHECK_THROWS_AS(accuracy(ConfusionMatrix(2)), DomainError);
    auto m = precision_recall_f1(ConfusionMatrix(3, {4, 1, 0, 2, 5, 0, 0, 0, 0}), 2);
    CHECK(m.precision == 0.0);
    CHECK(m.recall == 0.0);
    CHECK(m.f1 == 0.0);
    CHECK(m.degenerate);
}

TEST_CASE("equal precision and recall give the same f1") {
    ConfusionMatrix cm(2, {8, 2, 2, 8});
    auto m = precision_recall_f1(cm, 0);
    CHECK(m.precision == doctest::Approx(m.recall));
    CHECK(m.f1 == doctest::Approx(m.precision));
}

TEST_CASE("from predictions") {
    std::vector<int> truth{0, 0, 1, 1, 2};
    std::vector<int> pred{0, 1, 1, 1, 0};
    auto cm = ConfusionMatrix::from_predictions(3, truth, pred);
    CHECK(cm.at(0, 0) == 1);
    CHECK(cm.at(0, 1) == 1);
    CHECK(cm.at(1, 1) == 2);
    CHECK(cm.at(2, 0) == 1);
    CHECK(cm.total() == 5);
    CHECK(cm.trace() == 3);
}

namespace {

// std::vector<bool> has no contiguous storage to view as span<const bool>.
struct Labels {
    std::unique_ptr<bool[]> data;
    std::size_t n = 0;
    explicit Labels(const std::vector<bool>& v) : data(new bool[v.size()]), n(v.size()) {
        for (std::size_t i = 0; i < n; ++i) data[i] = v[i];
    }
    std::span<const bool> span() const { return {data.get(), n}; }
};

}  // namespace

TEST_CASE("roc edge cases") {
    std::vector<double> s{0.9, 0.8, 0.2, 0.1};
    Labels y({true, true, false, false});
    auto c = roc_curve(s, y.span());
    CHECK(c.auc == 1.0);
    CHECK(c.points.front().fpr == 0.0);
    CHECK(c.points.front().tpr == 0.0);
    CHECK(c.points.back().fpr == 1.0);
    CHECK(c.points.back().tpr == 1.0);

    std::vector<double> flat(6, 0.4);
    Labels mixed({true, false, true, false, false, true});
    CHECK(roc_curve(flat, mixed.span()).auc == 0.5);

    Labels one({true, true, true, true});
    CHECK_THROWS_AS(roc_curve(s, one.span()), DomainError);
}

TEST_CASE("roc area equals the pairwise estimator") {
    Rng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 5 + rng.below(60);
        std::vector<double> scores(n);
        std::vector<bool> pos(n);
        for (std::size_t i = 0; i < n; ++i) {
            // coarse grid so ties are common
            scores[i] = static_cast<double>(rng.below(12)) / 11.0;
            pos[i] = rng.bernoulli(0.4);
        }
        pos[0] = true;
        pos[1] = false;
        Labels y(pos);
        CHECK(roc_curve(scores, y.span()).auc == doctest::Approx(oracle::pairwise_auc(scores, pos)).epsilon(1e-12));
    }
}

TEST_CASE("report and csv") {
    ConfusionMatrix cm(2, {50, 10, 5, 35});
    std::vector<std::string> labels{"Normal", "Anomaly"};
    auto r = make_report(cm, labels);
    REQUIRE(r.per_class.size() == 2);
    CHECK(r.per_class[0].label == "Normal");
    CHECK(r.per_class[1].precision == doctest::Approx(35.0 / 45.0));
    std::ostringstream out;
    write_metrics_csv(out, r);
    CHECK(out.str().rfind("accuracy,0.85", 0) == 0);

    std::istringstream in("Normal,Anomaly\n50,10\n5,35\n");
    auto lm = read_confusion_csv(in);
    CHECK(lm.labels == labels);
    CHECK(accuracy(lm.matrix) == doctest::Approx(0.85));
    std::istringstream bare("1,2\n3,4\n");
    auto lb = read_confusion_csv(bare);
    CHECK(lb.labels.empty());
    CHECK(lb.matrix.at(1, 0) == 3);
    std::istringstream ragged("1,2\n3\n");
    CHECK_THROWS_AS(read_confusion_csv(ragged), FormatError);
}

}
