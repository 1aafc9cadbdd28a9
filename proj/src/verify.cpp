#include "lapewc/verify.hpp"

#include "lapewc/fisher.hpp"
#include "lapewc/net.hpp"
#include "lapewc/oracle.hpp"
#include "lapewc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace lapewc {

RandomConsolidation random_consolidation(std::uint64_t seed, std::size_t dim, std::size_t n_tasks,
                                         double lambda_prior, const DebiasOptions& options) {
    Rng rng(seed);
    Hyperparams hyper;
    hyper.lambda_prior = lambda_prior;
    RandomConsolidation out{init_posterior(hyper, dim), PenaltyBank{dim, lambda_prior, {}}};
    const auto p = static_cast<Eigen::Index>(dim);
    for (std::size_t t = 0; t < n_tasks; ++t) {
        const TaskId id(1, static_cast<char>('A' + t));
        const double lambda = rng.uniform(1.0, 100.0);
        Vector fisher(p);
        Vector optimum(p);
        Vector weighted = Vector::Zero(p);
        for (const auto& pen : out.bank.penalties) weighted += pen.precision.values().cwiseProduct(pen.center.values());
        const Vector held = out.bank.total_precision().values();
        for (Eigen::Index i = 0; i < p; ++i) {
            fisher[i] = rng.uniform() < 0.1 ? 0.0 : rng.uniform(0.01, 1.0);
            optimum[i] = rng.normal();
            if (fisher[i] == 0.0 && held[i] > 0.0) optimum[i] = weighted[i] / held[i];
        }
        const ParamVector theta(optimum);
        const DiagPrecision f(fisher);
        auto deb = debiased_center(out.bank, out.consolidated, id, theta, f, lambda, options);
        out.bank = add_penalty(out.bank, std::move(deb.penalty));
        out.consolidated = consolidate_single(out.consolidated, id, theta, f, lambda);
    }
    return out;
}

double max_gradient_gap(const ConsolidatedPosterior& consolidated, const PenaltyBank& bank, std::uint64_t seed,
                        std::size_t n_points) {
    Rng rng(seed);
    double worst = 0.0;
    const auto p = static_cast<Eigen::Index>(bank.dim);
    for (std::size_t k = 0; k < n_points; ++k) {
        Vector x(p);
        for (Eigen::Index i = 0; i < p; ++i) x[i] = 2.0 * rng.normal();
        const ParamVector theta(x);
        const Vector a = consolidated.grad(theta).values();
        const Vector b = bank.grad(theta).values();
        for (Eigen::Index i = 0; i < p; ++i) {
            worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(a[i])));
        }
    }
    return worst;
}

RunSettings quadratic_settings(std::size_t dim, double lambda_prior) {
    RunSettings s;
    s.architecture.layer_sizes = {dim, 1};
    s.architecture.activation = Activation::identity;
    s.architecture.head = Head{HeadKind::gaussian_regression, 1.0};
    s.architecture.bias = false;
    s.init_seed = 3;
    s.hyper.lambda_prior = lambda_prior;
    s.optimizer.method = OptimizerMethod::gradient_descent;
    s.optimizer.learning_rate = 0.05;
    s.optimizer.max_steps = 20000;
    s.optimizer.grad_tol = 1e-8;
    s.learner.fisher_mode = FisherMode::expected;
    return s;
}

std::vector<TaskSpec> quadratic_tasks(std::size_t n, std::size_t dim, std::size_t n_samples, double overlap,
                                      std::uint64_t seed) {
    std::vector<TaskSpec> specs;
    for (std::size_t t = 0; t < n; ++t) {
        TaskSpec s;
        s.id = TaskId(1, static_cast<char>('A' + t));
        s.kind = TaskKind::diag_linear_gaussian;
        s.n_samples = n_samples;
        s.input_dim = dim;
        s.seed = seed + 101 * t;
        s.overlap = overlap;
        s.noise_variance = 1.0;
        specs.push_back(s);
    }
    return specs;
}

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << x;
    return os.str();
}

std::string plain(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

PropertyResult gradient_check(const std::string& name, HeadKind head, std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (int instance = 0; instance < 5; ++instance) {
        Architecture arch;
        arch.layer_sizes = {4, 5, head == HeadKind::categorical ? std::size_t{3} : std::size_t{2}};
        arch.activation = Activation::tanh;
        arch.head = Head{head, 0.7};
        Network net(arch);
        Vector theta(static_cast<Eigen::Index>(net.param_count()));
        for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] = rng.normal();
        TaskDataset data;
        data.inputs = Matrix(6, 4);
        for (Eigen::Index i = 0; i < data.inputs.size(); ++i) data.inputs.data()[i] = rng.normal();
        if (head == HeadKind::categorical) {
            std::vector<int> labels;
            for (int n = 0; n < 6; ++n) labels.push_back(static_cast<int>(rng.below(3)));
            data.targets = labels;
        } else {
            Matrix y(6, 2);
            for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();
            data.targets = y;
        }
        const ParamVector point(theta);
        const Vector analytic = net.grad_nll(point, data).values();
        const Vector numeric = central_difference_gradient(
            [&](const ParamVector& p) { return net.neg_log_likelihood(p, data); }, point, 1e-5);
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            const double scale = std::max(std::abs(numeric[i]), 1e-8 / 1e-4);
            worst = std::max(worst, std::abs(analytic[i] - numeric[i]) / scale);
        }
    }
    return {name, worst < 1e-4, "max relative error " + fmt(worst)};
}

PropertyResult per_example_sum() {
    Rng rng(17);
    Architecture arch;
    arch.layer_sizes = {3, 4, 2};
    arch.head = Head{HeadKind::categorical, 1.0};
    Network net(arch);
    const ParamVector theta = net.init_params(5);
    TaskDataset data;
    data.inputs = Matrix(9, 3);
    for (Eigen::Index i = 0; i < data.inputs.size(); ++i) data.inputs.data()[i] = rng.normal();
    std::vector<int> labels;
    for (int n = 0; n < 9; ++n) labels.push_back(n % 2);
    data.targets = labels;
    Vector sum = Vector::Zero(static_cast<Eigen::Index>(net.param_count()));
    for (const auto& g : net.per_example_grads(theta, data)) sum += g.values();
    const double gap = (sum - net.grad_nll(theta, data).values()).lpNorm<Eigen::Infinity>();
    return {"per_example_grads_sum", gap <= 1e-10, "max gap " + fmt(gap)};
}

PropertyResult decomposition(double lambda_prior, const DebiasOptions& options) {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto state = random_consolidation(seed, 50, 3, lambda_prior, options);
        worst = std::max(worst, max_gradient_gap(state.consolidated, state.bank, seed + 1000, 100));
    }
    return {"decomposition_identity[lambda_prior=" + plain(lambda_prior) + "]", worst <= 1e-8,
            "max relative gradient gap " + fmt(worst)};
}

PropertyResult conjugate_oracle(double lambda_prior) {
    const auto specs = quadratic_tasks(3, 16, 64, 0.5, 42);
    const auto settings = quadratic_settings(16, lambda_prior);
    const auto report = run_sequence(specs, Strategy::laplace_single, settings);
    const auto exact = exact_sequential_posterior(generate_sequence(specs), lambda_prior, 1.0, 16);

    Network net(settings.architecture);
    Learner learner(net, Strategy::laplace_single, settings.hyper, settings.optimizer,
                    net.init_params(settings.init_seed), settings.learner);
    const auto data = generate_sequence(specs);
    bool converged = true;
    for (std::size_t t = 0; t < specs.size(); ++t) converged &= learner.learn(specs[t].id, data[t]).train.converged;
    const double mean_gap = (learner.consolidated().anchor.values() - exact.mean.values()).lpNorm<Eigen::Infinity>();
    const double prec_gap =
        (learner.consolidated().precision.values() - exact.precision_diag.values()).lpNorm<Eigen::Infinity>();
    const double report_gap = *report.stages.back().oracle_distance;
    const bool ok = converged && mean_gap <= 1e-6 && prec_gap <= 1e-8 && report_gap <= 1e-6;
    return {"conjugate_oracle[lambda_prior=" + plain(lambda_prior) + "]", ok,
            "anchor gap " + fmt(mean_gap) + ", precision gap " + fmt(prec_gap)};
}

PropertyResult two_task_equivalence() {
    Rng rng(23);
    const std::size_t dim = 12;
    Vector opt(12), fisher(12);
    for (Eigen::Index i = 0; i < 12; ++i) {
        opt[i] = rng.normal();
        fisher[i] = rng.uniform();
    }
    const double lambda = 30.0;
    // With lambda_prior > 0 the two schemes differ: EWC keeps the prior at zero
    // while the single penalty folds it into the anchored term.
    const auto single0 = consolidate_single(init_posterior(Hyperparams{}, dim), "A", ParamVector(opt),
                                            DiagPrecision(fisher), lambda);
    const auto bank0 = ewc_multi_penalty({TaskOptimum{"A", ParamVector(opt), DiagPrecision(fisher), lambda}}, 0.0);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        Vector x(12);
        for (Eigen::Index i = 0; i < 12; ++i) x[i] = rng.normal();
        const ParamVector theta(x);
        worst = std::max(worst, std::abs(single0.value(theta) - bank0.value(theta)));
        worst = std::max(worst, (single0.grad(theta).values() - bank0.grad(theta).values()).lpNorm<Eigen::Infinity>());
    }
    return {"two_task_equivalence", worst <= 1e-12, "max gap " + fmt(worst)};
}

PropertyResult revisit_identity(const DebiasOptions& options) {
    const auto specs = quadratic_tasks(3, 16, 64, 0.5, 7);
    auto settings = quadratic_settings(16, 0.1);
    settings.learner.debias = options;
    Network net(settings.architecture);
    Learner learner(net, Strategy::laplace_multi_debiased, settings.hyper, settings.optimizer,
                    net.init_params(settings.init_seed), settings.learner);
    const auto data = generate_sequence(specs);
    for (std::size_t t = 0; t < specs.size(); ++t) (void)learner.learn(specs[t].id, data[t]);
    (void)learner.revisit("A");
    const double gap = max_gradient_gap(learner.consolidated(), learner.bank(), 99, 100);
    return {"revisit_preserves_identity", gap <= 1e-8, "max relative gradient gap " + fmt(gap)};
}

PropertyResult double_counting() {
    const auto specs = quadratic_tasks(3, 16, 64, 1.0, 11);
    const auto settings = quadratic_settings(16, 0.1);
    const auto single = run_sequence(specs, Strategy::laplace_single, settings);
    const auto ewc = run_sequence(specs, Strategy::ewc_multi, settings);
    const double ds = *single.stages.back().oracle_distance;
    const double de = *ewc.stages.back().oracle_distance;
    return {"double_counting_bias", de >= 10.0 * ds && ds <= 1e-6,
            "ewc_multi distance " + fmt(de) + ", laplace_single distance " + fmt(ds)};
}

}  // namespace

std::vector<PropertyResult> run_verify_suite(const VerifyOptions& options) {
    DebiasOptions debias;
    if (options.flip_denominator) debias.denominator = CenterDenominator::raw_fisher;

    std::vector<PropertyResult> results;
    auto guarded = [&](const std::string& name, auto&& fn) {
        try {
            results.push_back(fn());
        } catch (const std::exception& e) {
            results.push_back({name, false, std::string("threw: ") + e.what()});
        }
    };
    guarded("grad_finite_difference[gaussian]", [] { return gradient_check("grad_finite_difference[gaussian]", HeadKind::gaussian_regression, 1); });
    guarded("grad_finite_difference[categorical]", [] { return gradient_check("grad_finite_difference[categorical]", HeadKind::categorical, 2); });
    guarded("per_example_grads_sum", [] { return per_example_sum(); });
    guarded("decomposition_identity[lambda_prior=0]", [&] { return decomposition(0.0, debias); });
    guarded("decomposition_identity[lambda_prior=0.1]", [&] { return decomposition(0.1, debias); });
    guarded("conjugate_oracle[lambda_prior=0]", [] { return conjugate_oracle(0.0); });
    guarded("conjugate_oracle[lambda_prior=0.1]", [] { return conjugate_oracle(0.1); });
    guarded("two_task_equivalence", [] { return two_task_equivalence(); });
    guarded("revisit_preserves_identity", [&] { return revisit_identity(debias); });
    guarded("double_counting_bias", [] { return double_counting(); });
    return results;
}

}  // namespace lapewc
