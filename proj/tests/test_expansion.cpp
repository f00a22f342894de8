#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "test_support.hpp"

using namespace probweb;
using testsupport::fig1_system;
using testsupport::fig1_indep_system;

namespace {

ProbabilitySystem two_table_system(std::vector<std::vector<std::string>> comps,
                                   std::vector<ProbTable> tables,
                                   std::vector<Variable> vars) {
    Structure st;
    st.components = std::move(comps);
    return ProbabilitySystem(JointSpace(std::move(vars)), std::move(st), std::move(tables));
}

}  // namespace

TEST_CASE("system construction validates tables against structure and space") {
    JointSpace space({{"A", 2}, {"B", 2}});
    Structure st;
    st.components = {{"A", "B"}};

    // Scope order must match the component listing.
    std::vector<ProbTable> flipped;
    flipped.emplace_back(std::vector<Variable>{{"B", 2}, {"A", 2}},
                         std::vector<double>{0.25, 0.25, 0.25, 0.25});
    REQUIRE_THROWS_AS(ProbabilitySystem(space, st, flipped), Error);

    std::vector<ProbTable> unnormalized;
    unnormalized.emplace_back(std::vector<Variable>{{"A", 2}, {"B", 2}},
                              std::vector<double>{0.5, 0.5, 0.5, 0.5});
    REQUIRE_THROWS_AS(ProbabilitySystem(space, st, unnormalized), Error);

    // A space variable no component covers.
    JointSpace wide({{"A", 2}, {"B", 2}, {"Z", 2}});
    std::vector<ProbTable> ok;
    ok.emplace_back(std::vector<Variable>{{"A", 2}, {"B", 2}},
                    std::vector<double>{0.25, 0.25, 0.25, 0.25});
    REQUIRE_THROWS_AS(ProbabilitySystem(wide, st, ok), Error);

    // Table count must match component count.
    Structure two;
    two.components = {{"A", "B"}, {"A"}};
    REQUIRE_THROWS_AS(ProbabilitySystem(space, two, ok), Error);

    // Cardinality mismatch between table scope and space.
    std::vector<ProbTable> card;
    card.emplace_back(std::vector<Variable>{{"A", 3}, {"B", 2}},
                      std::vector<double>{0.2, 0.2, 0.2, 0.2, 0.1, 0.1});
    REQUIRE_THROWS_AS(ProbabilitySystem(space, st, card), Error);
}

TEST_CASE("default_unpacking rejects structures with no terminal") {
    std::vector<std::pair<std::string, std::string>> pairs{{"A", "B"}, {"B", "C"}, {"C", "A"}};
    std::vector<ProbTable> tables;
    for (const auto& names : pairs)
        tables.emplace_back(std::vector<Variable>{{names.first, 2}, {names.second, 2}},
                            std::vector<double>{0.25, 0.25, 0.25, 0.25});
    auto sys = two_table_system({{"A", "B"}, {"B", "C"}, {"C", "A"}}, std::move(tables),
                                {{"A", 2}, {"B", 2}, {"C", 2}});
    try {
        default_unpacking(sys);
        FAIL("expected a throw");
    } catch (const Error& e) {
        REQUIRE(e.code() == std::string(errc::not_a_web));
    }
}

TEST_CASE("product extension of the reference system") {
    auto sys = fig1_system();
    auto px = product_extension(sys, default_unpacking(sys));
    REQUIRE(px.model == ModelKind::standard);
    REQUIRE(px.k == 1.0);
    REQUIRE(std::abs(px.joint.sum() - 1.0) <= 1e-12);
    // P(A=1,B=1,C=1,D=1) = P(D=1|B=1,C=1) P(C=1|A=1) P(A=1,B=1)
    //                    = 0.8 * 0.4 * 0.4
    REQUIRE(px.joint.values[15] == Catch::Approx(testsupport::kFig1PxAllOnes).margin(1e-12));
}

TEST_CASE("product extension of a single component is the table itself") {
    std::vector<ProbTable> tables;
    tables.emplace_back(std::vector<Variable>{{"A", 2}, {"B", 2}},
                        std::vector<double>{0.3, 0.2, 0.1, 0.4});
    auto sys = two_table_system({{"A", "B"}}, std::move(tables), {{"A", 2}, {"B", 2}});
    auto px = product_extension(sys, default_unpacking(sys));
    REQUIRE(testsupport::max_abs_diff(px.joint.values, sys.tables[0].values()) <= 1e-15);
}

TEST_CASE("product extension of disjoint components is their product") {
    std::vector<ProbTable> tables;
    tables.emplace_back(std::vector<Variable>{{"A", 2}, {"B", 2}},
                        std::vector<double>{0.3, 0.2, 0.1, 0.4});
    tables.emplace_back(std::vector<Variable>{{"C", 2}, {"D", 2}},
                        std::vector<double>{0.4, 0.1, 0.3, 0.2});
    auto sys = two_table_system({{"A", "B"}, {"C", "D"}}, std::move(tables),
                                {{"A", 2}, {"B", 2}, {"C", 2}, {"D", 2}});
    auto px = product_extension(sys, default_unpacking(sys));
    for (std::size_t s = 0; s < px.joint.values.size(); ++s) {
        auto state = px.joint.space.state_of(s);
        double expected = sys.tables[0].at(std::vector<int>{state[0], state[1]}) *
                          sys.tables[1].at(std::vector<int>{state[2], state[3]});
        REQUIRE(std::abs(px.joint.values[s] - expected) <= 1e-15);
    }
}

TEST_CASE("product extension still sums to one past zero marginals") {
    // P(A=1) = 0 in both tables, so conditioning on A hits an empty slice.
    std::vector<ProbTable> tables;
    tables.emplace_back(std::vector<Variable>{{"A", 2}, {"B", 2}},
                        std::vector<double>{0.5, 0.5, 0.0, 0.0});
    tables.emplace_back(std::vector<Variable>{{"A", 2}, {"C", 2}},
                        std::vector<double>{0.6, 0.4, 0.0, 0.0});
    auto sys = two_table_system({{"A", "B"}, {"A", "C"}}, std::move(tables),
                                {{"A", 2}, {"B", 2}, {"C", 2}});
    auto px = product_extension(sys, default_unpacking(sys));
    REQUIRE(std::abs(px.joint.sum() - 1.0) <= 1e-12);
    // All mass sits on A = 0.
    for (std::size_t s = 0; s < px.joint.values.size(); ++s)
        if (px.joint.space.state_of(s)[0] == 1) REQUIRE(px.joint.values[s] == 0.0);
}

TEST_CASE("alternative model of the reference system") {
    auto sys = fig1_system();
    auto alt = alternative_model(sys, default_unpacking(sys));
    REQUIRE(alt.model == ModelKind::alternative);
    REQUIRE(std::abs(alt.k - testsupport::kFig1K) <= 1e-12);
    REQUIRE(std::abs(alt.joint.sum() - 1.0) <= 1e-12);
    REQUIRE(std::abs(alt.joint.values[0] - testsupport::kFig1PstarAllZeros) <= 1e-12);
    // Unnormalized weight at the all-zero state:
    // 0.24 * 0.4 * 0.3 / (0.4 * 0.7 * 0.5)
    REQUIRE(alt.joint.values[0] == Catch::Approx(alt.k * 0.0288 / 0.14).margin(1e-9));
}

TEST_CASE("alternative model equals the product extension when marginals are independent") {
    auto sys = fig1_indep_system();
    auto up = default_unpacking(sys);
    auto px = product_extension(sys, up);
    auto alt = alternative_model(sys, up);
    REQUIRE(std::abs(alt.k - 1.0) <= 1e-12);
    REQUIRE(testsupport::max_abs_diff(px.joint.values, alt.joint.values) <= 1e-12);
}

TEST_CASE("on a chain the two models coincide whether or not tables agree") {
    for (auto bc : {std::vector<double>{0.24, 0.16, 0.36, 0.24},
                    std::vector<double>{0.25, 0.25, 0.25, 0.25}}) {
        std::vector<ProbTable> tables;
        tables.emplace_back(std::vector<Variable>{{"A", 2}, {"B", 2}},
                            std::vector<double>{0.3, 0.2, 0.1, 0.4});
        tables.emplace_back(std::vector<Variable>{{"B", 2}, {"C", 2}}, bc);
        auto sys = two_table_system({{"A", "B"}, {"B", "C"}}, std::move(tables),
                                    {{"A", 2}, {"B", 2}, {"C", 2}});
        auto up = default_unpacking(sys);
        auto px = product_extension(sys, up);
        auto alt = alternative_model(sys, up);
        REQUIRE(std::abs(alt.k - 1.0) <= 1e-12);
        REQUIRE(testsupport::max_abs_diff(px.joint.values, alt.joint.values) <= 1e-12);
    }
}

TEST_CASE("single dyadic component gives k equal to one exactly") {
    std::vector<ProbTable> tables;
    tables.emplace_back(std::vector<Variable>{{"A", 2}, {"B", 2}},
                        std::vector<double>{0.25, 0.25, 0.25, 0.25});
    auto sys = two_table_system({{"A", "B"}}, std::move(tables), {{"A", 2}, {"B", 2}});
    auto alt = alternative_model(sys, default_unpacking(sys));
    REQUIRE(alt.k == 1.0);
}

TEST_CASE("alternative model throws when every weight vanishes") {
    // The B supports of the two tables are disjoint, so each state loses its
    // weight either to a zero numerator or a zero intersection marginal.
    std::vector<ProbTable> tables;
    tables.emplace_back(std::vector<Variable>{{"A", 2}, {"B", 2}},
                        std::vector<double>{0.5, 0.0, 0.5, 0.0});
    tables.emplace_back(std::vector<Variable>{{"B", 2}, {"C", 2}},
                        std::vector<double>{0.0, 0.0, 0.5, 0.5});
    auto sys = two_table_system({{"A", "B"}, {"B", "C"}}, std::move(tables),
                                {{"A", 2}, {"B", 2}, {"C", 2}});
    try {
        alternative_model(sys, default_unpacking(sys));
        FAIL("expected a throw");
    } catch (const Error& e) {
        REQUIRE(e.code() == std::string(errc::all_zero_weight));
    }
}

TEST_CASE("non-web alternative model on a cyclic structure") {
    std::vector<ProbTable> tables;
    tables.emplace_back(std::vector<Variable>{{"A", 2}, {"B", 2}},
                        std::vector<double>{0.4, 0.1, 0.1, 0.4});
    tables.emplace_back(std::vector<Variable>{{"B", 2}, {"C", 2}},
                        std::vector<double>{0.4, 0.1, 0.1, 0.4});
    tables.emplace_back(std::vector<Variable>{{"C", 2}, {"A", 2}},
                        std::vector<double>{0.4, 0.1, 0.1, 0.4});
    auto sys = two_table_system({{"A", "B"}, {"B", "C"}, {"C", "A"}}, std::move(tables),
                                {{"A", 2}, {"B", 2}, {"C", 2}});
    auto alt = alternative_model_nonweb(sys, OstarRule::maximal);
    // All pairwise intersections are singletons with uniform marginals, so
    // every weight is 8 * P(ab) P(bc) P(ca).
    REQUIRE(std::abs(alt.k - 1.0 / 1.216) <= 1e-12);
    REQUIRE(std::abs(alt.joint.values[0] - 0.512 / 1.216) <= 1e-12);
    REQUIRE(std::abs(alt.joint.values[1] - 0.032 / 1.216) <= 1e-12);
    REQUIRE(std::abs(alt.joint.sum() - 1.0) <= 1e-12);
}

TEST_CASE("non-web alternative model agrees with the web one on a consistent web") {
    auto sys = fig1_system();
    auto alt_web = alternative_model(sys, default_unpacking(sys));
    auto alt_any = alternative_model_nonweb(sys, OstarRule::maximal);
    REQUIRE(std::abs(alt_web.k - alt_any.k) <= 1e-12);
    REQUIRE(testsupport::max_abs_diff(alt_web.joint.values, alt_any.joint.values) <= 1e-12);
}

TEST_CASE("proportional fitting converges on the reference system") {
    auto sys = fig1_system();
    auto fit = ipf_fit(sys, uniform_distribution(sys.space));
    REQUIRE(fit.status == IpfStatus::converged);
    REQUIRE(fit.residual < 1e-10);
    REQUIRE(std::abs(fit.joint.sum() - 1.0) <= 1e-12);
    REQUIRE(testsupport::marginal_residual(fit.joint, sys) < 1e-9);
}

TEST_CASE("proportional fitting stops immediately when already fitted") {
    JointSpace space({{"A", 2}, {"B", 2}, {"C", 2}, {"D", 2}});
    Structure st{{{"A", "B"}, {"A", "C"}, {"B", "C", "D"}}};
    std::mt19937_64 rng(5);
    auto member = testsupport::random_joint(rng, space);
    std::vector<ProbTable> tables;
    for (const auto& comp : st.components) tables.push_back(marginal_of(member, comp));
    ProbabilitySystem sys(space, st, std::move(tables));

    auto fit = ipf_fit(sys, member);
    REQUIRE(fit.status == IpfStatus::converged);
    REQUIRE(fit.sweeps == 0);
    REQUIRE(fit.residual == 0.0);
}

TEST_CASE("the per-sweep callback fires once per completed sweep") {
    auto sys = fig1_indep_system();
    int calls = 0;
    int last_sweep = 0;
    auto fit = ipf_fit(sys, uniform_distribution(sys.space), IpfOptions{},
                       [&](const JointDistribution& j, int sweep) {
                           ++calls;
                           last_sweep = sweep;
                           REQUIRE(std::abs(j.sum() - 1.0) <= 1e-12);
                       });
    REQUIRE(fit.status == IpfStatus::converged);
    REQUIRE(calls == fit.sweeps);
    REQUIRE(last_sweep == fit.sweeps);
    REQUIRE(fit.sweeps > 1);
}

TEST_CASE("divergence from any fitted member decreases across sweeps") {
    JointSpace space({{"A", 2}, {"B", 2}, {"C", 2}, {"D", 2}});
    Structure st{{{"A", "B"}, {"A", "C"}, {"B", "C", "D"}}};
    std::mt19937_64 rng(11);
    auto member = testsupport::random_joint(rng, space);
    std::vector<ProbTable> tables;
    for (const auto& comp : st.components) tables.push_back(marginal_of(member, comp));
    ProbabilitySystem sys(space, st, std::move(tables));

    double prev = std::numeric_limits<double>::infinity();
    ipf_fit(sys, uniform_distribution(space), IpfOptions{},
            [&](const JointDistribution& iterate, int) {
                double div = log_score(member) - relative_score(member, iterate);
                REQUIRE(div >= -1e-12);
                REQUIRE(div <= prev + 1e-12);
                prev = div;
            });
}

TEST_CASE("check_consistency accepts systems built from exact marginals") {
    JointSpace space({{"A", 2}, {"B", 2}, {"C", 2}, {"D", 2}});
    Structure st{{{"A", "B"}, {"A", "C"}, {"B", "C", "D"}}};
    auto sys = random_consistent_system(space, st, 17);
    auto verdict = check_consistency(sys);
    REQUIRE(verdict.status == ConsistencyStatus::consistent);
    REQUIRE(verdict.residual < 1e-9);
    REQUIRE(verdict.witness.has_value());
    REQUIRE(testsupport::marginal_residual(*verdict.witness, sys) < 1e-9);
}

TEST_CASE("check_consistency accepts both reference fixtures") {
    REQUIRE(check_consistency(fig1_system()).status == ConsistencyStatus::consistent);
    REQUIRE(check_consistency(fig1_indep_system()).status == ConsistencyStatus::consistent);
}

TEST_CASE("check_consistency rejects clashing marginal claims") {
    // P(A) says 0.9/0.1 while the pair table forces 0.5/0.5.
    std::vector<ProbTable> tables;
    tables.emplace_back(std::vector<Variable>{{"A", 2}}, std::vector<double>{0.9, 0.1});
    tables.emplace_back(std::vector<Variable>{{"A", 2}, {"B", 2}},
                        std::vector<double>{0.25, 0.25, 0.25, 0.25});
    auto sys = two_table_system({{"A"}, {"A", "B"}}, std::move(tables), {{"A", 2}, {"B", 2}});
    auto verdict = check_consistency(sys);
    REQUIRE(verdict.status == ConsistencyStatus::inconsistent);
    REQUIRE(verdict.residual > 0.1);
    REQUIRE_FALSE(verdict.witness.has_value());
}

TEST_CASE("check_consistency reports undetermined at a tiny iteration budget") {
    auto verdict = check_consistency(fig1_indep_system(), 1e-9, 2);
    REQUIRE(verdict.status == ConsistencyStatus::undetermined);
}

TEST_CASE("conditional compatibility holds for the product extension only") {
    auto sys = fig1_system();
    auto up = default_unpacking(sys);

    auto px = product_extension(sys, up);
    auto report_px = check_conditional_consistency(px.joint, sys, up);
    REQUIRE(report_px.max_deviation < 1e-9);
    REQUIRE(report_px.per_component.size() == 3);

    auto alt = alternative_model(sys, up);
    auto report_alt = check_conditional_consistency(alt.joint, sys, up);
    REQUIRE(report_alt.max_deviation > 1e-3);
}

TEST_CASE("conditional compatibility of a single-table system is exact") {
    std::vector<ProbTable> tables;
    tables.emplace_back(std::vector<Variable>{{"A", 2}, {"B", 2}},
                        std::vector<double>{0.3, 0.2, 0.1, 0.4});
    auto sys = two_table_system({{"A", "B"}}, std::move(tables), {{"A", 2}, {"B", 2}});
    auto up = default_unpacking(sys);
    auto px = product_extension(sys, up);
    auto report = check_conditional_consistency(px.joint, sys, up);
    REQUIRE(report.max_deviation == 0.0);
}

TEST_CASE("conditional check requires a joint over the system space") {
    auto sys = fig1_system();
    auto up = default_unpacking(sys);
    JointDistribution wrong(JointSpace({{"A", 2}, {"B", 2}}),
                            std::vector<double>{0.25, 0.25, 0.25, 0.25});
    REQUIRE_THROWS_AS(check_conditional_consistency(wrong, sys, up), Error);
}
