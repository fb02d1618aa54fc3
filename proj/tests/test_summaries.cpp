#include "oracles.hpp"

#include "bartvs/summaries.hpp"

#include <doctest.h>

using namespace bartvs;

namespace {

PosteriorTrace trace_of(const Eigen::MatrixXi& counts)
{
    PosteriorTrace tr;
    tr.counts = counts;
    tr.inclusion = (counts.array() > 0).matrix();
    tr.tree_leaves = (counts.rowwise().sum().array() + 1).matrix();
    tr.sigma2_path = Eigen::VectorXd::Ones(counts.rows());
    tr.mean_fit_path = Eigen::VectorXd::Zero(counts.rows());
    tr.config.draws = static_cast<int>(counts.rows());
    for (Eigen::Index j = 0; j < counts.cols(); ++j)
        tr.feature_names.push_back("x" + std::to_string(j + 1));
    return tr;
}

PosteriorTrace worked_trace()
{
    Eigen::MatrixXi c(2, 3);
    c << 2, 0, 2, 1, 1, 0;
    return trace_of(c);
}

void check_vec(const Eigen::VectorXd& got, std::initializer_list<double> want, double tol = 1e-14)
{
    REQUIRE(got.size() == static_cast<Eigen::Index>(want.size()));
    Eigen::Index i = 0;
    for (double w : want) {
        CHECK(got[i] == doctest::Approx(w).epsilon(tol));
        ++i;
    }
}

} // namespace

TEST_CASE("vip, vc and mpvip on the two-draw example")
{
    const auto tr = worked_trace();
    check_vec(vip(tr).values, {0.5, 0.25, 0.25});
    check_vec(vc(tr).values, {1.5, 0.5, 1.0});
    check_vec(mpvip(tr).values, {1.0, 0.5, 0.5});
    CHECK(vip(tr).kind == ImportanceKind::vip);
}

TEST_CASE("empty ensembles give zero importance")
{
    const auto tr = trace_of(Eigen::MatrixXi::Zero(3, 4));
    CHECK(vip(tr).values.isZero(0));
    CHECK(vc(tr).values.isZero(0));
    CHECK(mpvip(tr).values.isZero(0));
    auto with_log = tr;
    with_log.mi_node_log = std::vector<std::vector<MiNode>>(3);
    CHECK(metropolis_importance(with_log).values.isZero(0));
}

TEST_CASE("a single feature carries all normalized importance")
{
    Eigen::MatrixXi c(3, 1);
    c << 2, 5, 1;
    auto tr = trace_of(c);
    check_vec(vip(tr).values, {1.0});
    tr.mi_node_log = std::vector<std::vector<MiNode>>{{{0, 0.2}, {0, 0.3}}, {{0, 0.9}, {0, 0.1}, {0, 0.5}, {0, 0.5}, {0, 0.5}}, {{0, 0.7}}};
    check_vec(metropolis_importance(tr).values, {1.0});
}

TEST_CASE("MI averages acceptance probabilities per feature")
{
    Eigen::MatrixXi c(1, 2);
    c << 2, 0;
    auto tr = trace_of(c);
    tr.mi_node_log = std::vector<std::vector<MiNode>>{{{0, 0.4}, {0, 0.6}}};
    check_vec(metropolis_importance(tr).values, {1.0, 0.0});
}

TEST_CASE("MI requires the node log")
{
    const auto tr = worked_trace();
    CHECK_THROWS_WITH_AS(metropolis_importance(tr), doctest::Contains("MI logging was not enabled"), ValidationError);
}

TEST_CASE("importance matches the oracles on random traces")
{
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 200; ++rep) {
        const auto tr = oracle::random_trace(1 + rep % 30, 1 + rep % 9, rng);
        CHECK((vip(tr).values - oracle::vip(tr)).cwiseAbs().maxCoeff() <= 1e-14);
        CHECK((vc(tr).values - oracle::vc(tr)).cwiseAbs().maxCoeff() <= 1e-14);
        CHECK((mpvip(tr).values - oracle::mpvip(tr)).cwiseAbs().maxCoeff() <= 1e-14);
        CHECK((metropolis_importance(tr).values - oracle::mi(tr)).cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("vip sums to the fraction of non-empty draws")
{
    std::mt19937_64 rng(8);
    for (int rep = 0; rep < 200; ++rep) {
        const auto tr = oracle::random_trace(1 + rep % 20, 2 + rep % 7, rng, true, rep % 2 ? 0.3 : 0.0);
        const double nonempty = (tr.counts.rowwise().sum().array() > 0).cast<double>().sum();
        const double want = nonempty / static_cast<double>(tr.draws());
        CHECK(std::abs(vip(tr).values.sum() - want) <= 1e-10);
        if (nonempty > 0) {
            CHECK((vip(tr).values.array() >= 0).all());
            CHECK((vip(tr).values.array() <= 1).all());
        }
        const auto m = metropolis_importance(tr).values;
        CHECK((m.array() >= 0).all());
        CHECK(m.sum() <= 1.0 + 1e-10);
    }
}

TEST_CASE("vip equals vc over the common total when every draw has the same size")
{
    Eigen::MatrixXi c(3, 3);
    c << 2, 1, 1, 0, 4, 0, 1, 1, 2;
    const auto tr = trace_of(c);
    CHECK((vip(tr).values - vc(tr).values / 4.0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("importance is invariant to draw order")
{
    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 50; ++rep) {
        auto tr = oracle::random_trace(10, 5, rng, false);
        Eigen::PermutationMatrix<Eigen::Dynamic> perm(10);
        perm.setIdentity();
        std::shuffle(perm.indices().data(), perm.indices().data() + 10, rng);
        const auto shuffled = trace_of(perm * tr.counts);
        CHECK(vc(shuffled).values == vc(tr).values);
        CHECK((vip(shuffled).values - vip(tr).values).cwiseAbs().maxCoeff() <= 1e-15);
    }
}

TEST_CASE("descending midranks")
{
    check_vec(rank_descending(Eigen::Vector4d(0.5, 0.2, 0.2, 0.1)), {1, 2.5, 2.5, 4});
    check_vec(rank_descending(Eigen::Vector3d(3, 2, 1)), {1, 2, 3});
    check_vec(rank_descending(Eigen::Vector4d::Constant(7)), {2.5, 2.5, 2.5, 2.5});
}

TEST_CASE("midranks match the counting oracle and conserve the rank sum")
{
    std::mt19937_64 rng(2);
    std::uniform_int_distribution<int> small(0, 4);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    for (int rep = 0; rep < 300; ++rep) {
        const int p = 1 + rep % 25;
        Eigen::VectorXd v(p);
        for (int j = 0; j < p; ++j)
            v[j] = small(rng) * 0.25;
        const auto r = rank_descending(v);
        CHECK(r == oracle::midranks(v));
        CHECK(r.sum() == p * (p + 1) / 2.0);
        CHECK((r.array() >= 1).all());
        CHECK((r.array() <= p).all());
        // positive scaling keeps the order and the ties
        CHECK(rank_descending((scale(rng) * v).eval()) == r);
    }
}

TEST_CASE("type-7 quantiles")
{
    CHECK(quantile_type7(Eigen::Vector4d(1, 2, 3, 4), 0.25) == doctest::Approx(1.75));
    CHECK(quantile_type7(Eigen::Vector3d(0.1, 0.2, 0.3), 0.95) == doctest::Approx(0.29));
    CHECK(quantile_type7(Eigen::Matrix<double, 1, 1>(5.0), 0.75) == 5.0);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> z;
    for (int rep = 0; rep < 100; ++rep) {
        Eigen::VectorXd v(1 + rep % 17);
        for (auto& x : v)
            x = z(rng);
        for (double q : {0.0, 0.05, 0.25, 0.5, 0.75, 0.95, 1.0})
            CHECK(quantile_type7(v, q) ==
                  doctest::Approx(oracle::quantile7(std::vector<double>(v.begin(), v.end()), q)).epsilon(1e-14));
    }
}

TEST_CASE("summary matrix from four fits")
{
    std::vector<Eigen::VectorXd> per_fit;
    for (int l = 0; l < 4; ++l) {
        Eigen::VectorXd v(3);
        v << l + 1.0, 0.5, 10.0;
        per_fit.push_back(v);
    }
    const auto Z = build_summary_matrix(std::span<const Eigen::VectorXd>(per_fit), SummarySource::vc_measure);
    REQUIRE(Z.Z.rows() == 3);
    REQUIRE(Z.Z.cols() == 4);
    CHECK(Z.replicates == 4);
    CHECK(Z.Z(0, 0) == doctest::Approx(2.5));
    CHECK(Z.Z(0, 1) == doctest::Approx(1.75));
    // feature 2 is constant across fits
    CHECK(Z.Z(1, 1) == Z.Z(1, 0));
    CHECK(Z.Z(1, 3) == Z.Z(1, 2));
    CHECK(Z.Z(2, 2) == 1.0);
}

TEST_CASE("summary matrix from a single fit repeats the vector and its ranks")
{
    const auto tr = worked_trace();
    const std::vector<PosteriorTrace> traces{tr};
    const auto Z = build_summary_matrix(std::span<const PosteriorTrace>(traces), SummarySource::vc_measure);
    const Eigen::VectorXd v = vc(tr).values;
    const Eigen::VectorXd r = rank_descending(v);
    CHECK(Z.Z.col(0) == v);
    CHECK(Z.Z.col(1) == v);
    CHECK(Z.Z.col(2) == r);
    CHECK(Z.Z.col(3) == r);

    const auto Zv = build_summary_matrix(std::span<const PosteriorTrace>(traces), SummarySource::vip_measure);
    CHECK(Zv.Z.col(0) == vip(tr).values);

    const auto Zr = build_summary_matrix(std::span<const PosteriorTrace>(traces), SummarySource::vip_rank);
    REQUIRE(Zr.Z.cols() == 1);
    CHECK(Zr.Z.col(0) == rank_descending(vip(tr).values));
}

TEST_CASE("summary matrix respects its column ranges and fit order")
{
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 30; ++rep) {
        const int p = 2 + rep % 8;
        std::vector<PosteriorTrace> traces;
        for (int l = 0; l < 5; ++l)
            traces.push_back(oracle::random_trace(12, p, rng, false));
        const auto Z = build_summary_matrix(std::span<const PosteriorTrace>(traces), SummarySource::vc_measure);
        CHECK((Z.Z.leftCols(2).array() >= 0).all());
        CHECK((Z.Z.rightCols(2).array() >= 1).all());
        CHECK((Z.Z.rightCols(2).array() <= p).all());
        std::shuffle(traces.begin(), traces.end(), rng);
        const auto Z2 = build_summary_matrix(std::span<const PosteriorTrace>(traces), SummarySource::vc_measure);
        CHECK(Z2.Z == Z.Z);
    }
}

TEST_CASE("summary matrix rejects fits with different feature counts")
{
    std::vector<Eigen::VectorXd> per_fit{Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(4)};
    CHECK_THROWS_AS(build_summary_matrix(std::span<const Eigen::VectorXd>(per_fit), SummarySource::vc_measure),
                    ValidationError);
    std::vector<Eigen::VectorXd> none;
    CHECK_THROWS_AS(build_summary_matrix(std::span<const Eigen::VectorXd>(none), SummarySource::vc_measure),
                    ValidationError);
}
