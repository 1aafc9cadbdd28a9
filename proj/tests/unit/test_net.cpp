#include "lapewc/errors.hpp"
#include "lapewc/net.hpp"
#include "lapewc/oracle.hpp"
#include "lapewc/rng.hpp"
#include "lapewc/serialize.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

using namespace lapewc;

namespace {

// Slow reference evaluator: explicit per-neuron loops over the documented
// flattening order (weights row-major, then biases, layer by layer).
std::vector<double> slow_forward(const Architecture& arch, const Vector& theta, const std::vector<double>& x) {
    std::vector<double> a = x;
    std::size_t offset = 0;
    const std::size_t n_layers = arch.layer_sizes.size() - 1;
    for (std::size_t l = 1; l <= n_layers; ++l) {
        const std::size_t in = arch.layer_sizes[l - 1];
        const std::size_t out = arch.layer_sizes[l];
        std::vector<double> z(out, 0.0);
        for (std::size_t r = 0; r < out; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < in; ++c) s += theta[static_cast<Eigen::Index>(offset + r * in + c)] * a[c];
            if (arch.bias) s += theta[static_cast<Eigen::Index>(offset + out * in + r)];
            z[r] = (l < n_layers && arch.activation == Activation::tanh) ? std::tanh(s) : s;
        }
        offset += in * out + (arch.bias ? out : 0);
        a = z;
    }
    if (arch.head.kind == HeadKind::categorical) {
        double m = a[0];
        for (double v : a) m = std::max(m, v);
        double total = 0.0;
        for (double& v : a) total += (v = std::exp(v - m));
        for (double& v : a) v /= total;
    }
    return a;
}

// Scalar NLL oracle in long double.
long double slow_nll(const Architecture& arch, const Vector& theta, const TaskDataset& data) {
    long double total = 0.0L;
    for (Eigen::Index n = 0; n < data.inputs.rows(); ++n) {
        std::vector<double> x(static_cast<std::size_t>(data.inputs.cols()));
        for (Eigen::Index c = 0; c < data.inputs.cols(); ++c) x[static_cast<std::size_t>(c)] = data.inputs(n, c);
        auto out = slow_forward(arch, theta, x);
        if (arch.head.kind == HeadKind::categorical) {
            total -= std::log(static_cast<long double>(out[static_cast<std::size_t>(data.class_targets()[static_cast<std::size_t>(n)])]));
        } else {
            const long double var = arch.head.noise_variance;
            for (std::size_t k = 0; k < out.size(); ++k) {
                const long double r = data.regression_targets()(n, static_cast<Eigen::Index>(k)) - out[k];
                total += 0.5L * std::log(2.0L * std::numbers::pi_v<long double> * var) + r * r / (2.0L * var);
            }
        }
    }
    return total;
}

Architecture mlp(HeadKind head, std::size_t out, Activation act = Activation::tanh) {
    Architecture a;
    a.layer_sizes = {3, 5, 4, out};
    a.activation = act;
    a.head = Head{head, 0.6};
    return a;
}

TaskDataset make_data(Rng& rng, std::size_t n, std::size_t d, HeadKind head, std::size_t out) {
    TaskDataset data;
    data.inputs = Matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < data.inputs.size(); ++i) data.inputs.data()[i] = rng.normal();
    if (head == HeadKind::categorical) {
        std::vector<int> labels;
        for (std::size_t k = 0; k < n; ++k) labels.push_back(static_cast<int>(rng.below(out)));
        data.targets = labels;
    } else {
        Matrix y(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(out));
        for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();
        data.targets = y;
    }
    return data;
}

ParamVector random_params(Rng& rng, const Network& net, double scale = 1.0) {
    Vector v(static_cast<Eigen::Index>(net.param_count()));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = scale * rng.normal();
    return ParamVector(v);
}

}  // namespace

TEST_CASE("architecture parameter count follows layer sizes") {
    Architecture a;
    a.layer_sizes = {3, 5, 2};
    CHECK(a.param_count() == 3 * 5 + 5 + 5 * 2 + 2);
    a.bias = false;
    CHECK(a.param_count() == 3 * 5 + 5 * 2);
    a.layer_sizes = {4};
    CHECK_THROWS_AS(a.validate(), ArgumentError);
    a.layer_sizes = {4, 0};
    CHECK_THROWS_AS(a.validate(), ArgumentError);
}

TEST_CASE("forward: identity layer with W = I passes inputs through") {
    Architecture a;
    a.layer_sizes = {3, 3};
    a.activation = Activation::identity;
    Network net(a);
    Vector theta = Vector::Zero(12);
    theta[0] = theta[4] = theta[8] = 1.0;
    Matrix x(2, 3);
    x << 0.5, -1.0, 2.0, 3.0, 0.0, -7.25;
    CHECK(net.forward(ParamVector(theta), x) == x);
}

TEST_CASE("forward: zero parameters give uniform class probabilities") {
    Architecture a = mlp(HeadKind::categorical, 4);
    Network net(a);
    Matrix x = Matrix::Random(5, 3);
    const Matrix p = net.forward(ParamVector::zeros(net.param_count()), x);
    for (Eigen::Index i = 0; i < p.size(); ++i) CHECK(p.data()[i] == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("forward matches the per-neuron reference evaluator") {
    Rng rng(11);
    for (auto head : {HeadKind::gaussian_regression, HeadKind::categorical}) {
        for (bool bias : {true, false}) {
            Architecture a = mlp(head, 3);
            a.bias = bias;
            Network net(a);
            const auto theta = random_params(rng, net);
            const auto data = make_data(rng, 7, 3, head, 3);
            const Matrix out = net.forward(theta, data.inputs);
            for (Eigen::Index n = 0; n < 7; ++n) {
                std::vector<double> x(3);
                for (int c = 0; c < 3; ++c) x[static_cast<std::size_t>(c)] = data.inputs(n, c);
                const auto ref = slow_forward(a, theta.values(), x);
                for (int k = 0; k < 3; ++k) CHECK(std::abs(out(n, k) - ref[static_cast<std::size_t>(k)]) <= 1e-12);
            }
        }
    }
}

TEST_CASE("categorical rows are strictly positive and sum to one") {
    Rng rng(12);
    Network net(mlp(HeadKind::categorical, 5));
    for (int rep = 0; rep < 10; ++rep) {
        const auto theta = random_params(rng, net, 3.0);
        Matrix x(8, 3);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = 10.0 * rng.normal();
        const Matrix p = net.forward(theta, x);
        for (Eigen::Index n = 0; n < p.rows(); ++n) {
            CHECK(std::abs(p.row(n).sum() - 1.0) <= 1e-12);
            CHECK(p.row(n).minCoeff() > 0.0);
        }
    }
}

TEST_CASE("neg_log_likelihood analytic cases") {
    SUBCASE("zero residual leaves only the Gaussian normalizer") {
        Architecture a;
        a.layer_sizes = {1, 1};
        a.activation = Activation::identity;
        a.head = Head{HeadKind::gaussian_regression, 1.0};
        Network net(a);
        TaskDataset d{Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 3.0)};
        Vector theta(2);
        theta << 1.0, 1.0;  // 1 * 2 + 1 = 3
        CHECK(net.neg_log_likelihood(ParamVector(theta), d) == doctest::Approx(0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-15));
    }
    SUBCASE("uniform categorical gives N log K") {
        Network net(mlp(HeadKind::categorical, 4));
        Rng rng(3);
        const auto data = make_data(rng, 9, 3, HeadKind::categorical, 4);
        CHECK(net.neg_log_likelihood(ParamVector::zeros(net.param_count()), data) ==
              doctest::Approx(9.0 * std::log(4.0)).epsilon(1e-14));
    }
}

TEST_CASE("neg_log_likelihood matches the scalar long-double oracle") {
    Rng rng(21);
    for (auto head : {HeadKind::gaussian_regression, HeadKind::categorical}) {
        Architecture a = mlp(head, 3);
        Network net(a);
        for (int rep = 0; rep < 5; ++rep) {
            const auto theta = random_params(rng, net);
            const auto data = make_data(rng, 12, 3, head, 3);
            const double ours = net.neg_log_likelihood(theta, data);
            const auto ref = static_cast<double>(slow_nll(a, theta.values(), data));
            CHECK(std::abs(ours - ref) <= 1e-10 * std::max(1.0, std::abs(ref)));
        }
    }
}

TEST_CASE("neg_log_likelihood is additive over dataset concatenation") {
    Rng rng(22);
    for (auto head : {HeadKind::gaussian_regression, HeadKind::categorical}) {
        Network net(mlp(head, 3));
        const auto theta = random_params(rng, net);
        const auto a = make_data(rng, 5, 3, head, 3);
        const auto b = make_data(rng, 8, 3, head, 3);
        const double whole = net.neg_log_likelihood(theta, a.concatenated(b));
        CHECK(std::abs(whole - net.neg_log_likelihood(theta, a) - net.neg_log_likelihood(theta, b)) <= 1e-10);
    }
}

TEST_CASE("grad_nll agrees with central finite differences") {
    Rng rng(31);
    for (auto head : {HeadKind::gaussian_regression, HeadKind::categorical}) {
        for (auto act : {Activation::tanh, Activation::identity}) {
            Network net(mlp(head, 3, act));
            for (int rep = 0; rep < 4; ++rep) {
                const auto theta = random_params(rng, net, 0.8);
                const auto data = make_data(rng, 6, 3, head, 3);
                const Vector g = net.grad_nll(theta, data).values();
                const Vector fd = central_difference_gradient(
                    [&](const ParamVector& p) { return net.neg_log_likelihood(p, data); }, theta, 1e-5);
                for (Eigen::Index i = 0; i < g.size(); ++i) {
                    CHECK(std::abs(g[i] - fd[i]) <= 1e-4 * std::max(std::abs(fd[i]), 1e-8 / 1e-4));
                }
            }
        }
    }
}

TEST_CASE("grad_nll vanishes at an interpolating linear-Gaussian optimum") {
    Architecture a;
    a.layer_sizes = {3, 1};
    a.activation = Activation::identity;
    a.bias = false;
    Network net(a);
    Vector w(3);
    w << 0.5, -2.0, 1.25;
    Rng rng(4);
    Matrix x(10, 3);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
    TaskDataset d{x, Matrix(x * w)};
    CHECK(net.grad_nll(ParamVector(w), d).values().lpNorm<Eigen::Infinity>() <= 1e-10);
}

TEST_CASE("per_example_grads") {
    Rng rng(41);
    Network net(mlp(HeadKind::categorical, 3));
    const auto theta = random_params(rng, net);

    SUBCASE("sum equals grad_nll") {
        const auto data = make_data(rng, 15, 3, HeadKind::categorical, 3);
        const auto per = net.per_example_grads(theta, data);
        REQUIRE(per.size() == 15);
        Vector sum = Vector::Zero(static_cast<Eigen::Index>(net.param_count()));
        for (const auto& g : per) sum += g.values();
        CHECK((sum - net.grad_nll(theta, data).values()).lpNorm<Eigen::Infinity>() <= 1e-10);
    }
    SUBCASE("single example equals grad_nll") {
        const auto data = make_data(rng, 1, 3, HeadKind::categorical, 3);
        CHECK(net.per_example_grads(theta, data).front() == net.grad_nll(theta, data));
    }
    SUBCASE("duplicated example gives identical entries") {
        const auto one = make_data(rng, 1, 3, HeadKind::categorical, 3);
        const auto per = net.per_example_grads(theta, one.concatenated(one));
        CHECK(per[0] == per[1]);
    }
}

TEST_CASE("shape and value errors") {
    Network net(mlp(HeadKind::gaussian_regression, 2));
    Rng rng(5);
    const auto data = make_data(rng, 4, 3, HeadKind::gaussian_regression, 2);
    CHECK_THROWS_AS((void)net.grad_nll(ParamVector::zeros(3), data), DimensionError);
    CHECK_THROWS_AS((void)net.forward(ParamVector::zeros(net.param_count()), Matrix::Zero(2, 5)), DimensionError);

    Network clf(mlp(HeadKind::categorical, 3));
    TaskDataset bad{Matrix::Zero(2, 3), std::vector<int>{0, 3}};
    CHECK_THROWS_AS((void)clf.neg_log_likelihood(ParamVector::zeros(clf.param_count()), bad), ArgumentError);
    CHECK_THROWS_AS((void)net.neg_log_likelihood(ParamVector::zeros(net.param_count()), bad), ArgumentError);

    CHECK_THROWS_AS(ParamVector(Vector::Constant(2, std::nan(""))), NumericError);
}

TEST_CASE("non-finite likelihood names the offending example") {
    Architecture a;
    a.layer_sizes = {1, 1};
    a.activation = Activation::identity;
    a.bias = false;
    Network net(a);
    Matrix x(3, 1);
    x << 1.0, 1e200, 1.0;
    TaskDataset d{x, Matrix::Zero(3, 1)};
    try {
        (void)net.neg_log_likelihood(ParamVector(Vector::Constant(1, 1e200)), d);
        FAIL("expected NumericError");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("example 0") != std::string::npos);
    }
}

TEST_CASE("init_params is seeded and bounded by 1/sqrt(fan_in)") {
    Architecture a = mlp(HeadKind::gaussian_regression, 2);
    Network net(a);
    CHECK(net.init_params(9) == net.init_params(9));
    CHECK_FALSE(net.init_params(9) == net.init_params(10));
    const Vector t = net.init_params(9).values();
    CHECK(t.segment(0, 15).cwiseAbs().maxCoeff() <= 1.0 / std::sqrt(3.0));
    CHECK(t.segment(15, 5).isZero());  // first-layer biases
}

TEST_CASE("checkpoint round-trips architecture and parameters") {
    Architecture a = mlp(HeadKind::categorical, 3);
    a.bias = false;
    Network net(a);
    const auto theta = net.init_params(2);
    const auto [arch, params] = checkpoint_from_json(Json::parse(checkpoint_to_json(a, theta).dump()));
    CHECK(arch.layer_sizes == a.layer_sizes);
    CHECK(arch.bias == false);
    CHECK(arch.head.kind == HeadKind::categorical);
    CHECK(params == theta);
    CHECK_THROWS_AS((void)checkpoint_to_json(a, ParamVector::zeros(2)), DimensionError);
}
