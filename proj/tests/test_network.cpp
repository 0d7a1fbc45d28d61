#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "test_helpers.hpp"
#include "ubopf/errors.hpp"
#include "ubopf/network_io.hpp"

using namespace ubopf;

namespace {

const char* kMinimalTwoNode = R"({
  "bases": {"s_base_va": 1000.0, "v_base_phase_v": 230.94010767585033},
  "limits": {"v_min_pu": 0.97, "v_max_pu": 1.03},
  "nodes": [{"id": 1, "is_slack": true}, {"id": 2}],
  "lines": [{"from": 1, "to": 2,
    "z_series": [[[0.03, 0.01], [0.0, 0.0], [0.0, 0.0]],
                 [[0.0, 0.0], [0.03, 0.01], [0.0, 0.0]],
                 [[0.0, 0.0], [0.0, 0.0], [0.03, 0.01]]],
    "y_shunt": [[[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
                [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
                [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0]]]}],
  "loads": [{"node": 2, "phase": "a", "p_w": 300.0, "q_var": 90.0}],
  "conv_generators": [],
  "pv_inverters": []
})";

Network minimal_network() {
    std::istringstream in(kMinimalTwoNode);
    return read_network(in, "minimal");
}

}  // namespace

TEST_CASE("minimal two-node file parses") {
    const Network net = minimal_network();
    CHECK(net.node_count() == 2);
    CHECK(net.lines.size() == 1);
    CHECK(net.loads.size() == 1);
    CHECK(net.slack_index() == 0);
    CHECK(net.units == UnitSystem::si);
    CHECK(validate_network(net).empty());
}

TEST_CASE("line referencing an unknown node fails validation") {
    std::string doc = kMinimalTwoNode;
    const auto pos = doc.find("\"to\": 2");
    doc.replace(pos, 7, "\"to\": 99");
    std::istringstream in(doc);
    CHECK_THROWS_WITH_AS(read_network(in, "bad"),
                         doctest::Contains("unknown node"), ValidationError);
}

TEST_CASE("schema violations name the offending field") {
    std::istringstream in(R"({"bases": {"s_base_va": "oops"}})");
    CHECK_THROWS_WITH_AS(read_network(in, "bad"), doctest::Contains("s_base_va"), ParseError);
}

TEST_CASE("per-unit voltage base matches the 400 V system") {
    // 243.99 V on a 400/sqrt(3) V base is 1.056 pu within 0.1%.
    const double v_base = 400.0 / std::sqrt(3.0);
    CHECK(std::abs(243.99 / v_base - 1.056) / 1.056 < 1e-3);
}

TEST_CASE("per-unit conversion scales the minimal network") {
    const Network net = minimal_network();
    const Network pu = to_per_unit(net);
    const double z_base = net.v_base_phase * net.v_base_phase / net.s_base;
    CHECK(pu.units == UnitSystem::per_unit);
    CHECK(pu.lines[0].z_series(0, 0).real() == doctest::Approx(0.03 / z_base).epsilon(1e-14));
    CHECK(pu.loads[0].p_demand == doctest::Approx(0.3).epsilon(1e-14));
    // zero entries stay zero
    CHECK(pu.lines[0].z_series(0, 1) == Complex(0.0, 0.0));
}

TEST_CASE("pu -> SI -> pu round trip is the identity within 1e-12") {
    const Network net = minimal_network();
    const Network back = from_per_unit(to_per_unit(net));
    CHECK(back.units == UnitSystem::si);
    for (std::size_t i = 0; i < net.lines.size(); ++i) {
        const double scale = net.lines[i].z_series.cwiseAbs().maxCoeff();
        CHECK((back.lines[i].z_series - net.lines[i].z_series).cwiseAbs().maxCoeff() <=
              1e-12 * scale);
    }
    for (std::size_t i = 0; i < net.loads.size(); ++i) {
        CHECK(back.loads[i].p_demand ==
              doctest::Approx(net.loads[i].p_demand).epsilon(1e-12));
        CHECK(back.loads[i].q_demand ==
              doctest::Approx(net.loads[i].q_demand).epsilon(1e-12));
    }
    CHECK(back.limits.v_min == net.limits.v_min);
}

TEST_CASE("validation flags multiple slack nodes") {
    Network net = minimal_network();
    net.nodes[1].is_slack = true;
    bool found = false;
    for (const auto& d : validate_network(net))
        if (d.message.find("multiple slack") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("validation flags a singular series impedance") {
    Network net = minimal_network();
    // Rank-1 matrix: every row identical.
    Matrix3c z = Matrix3c::Constant(Complex(0.02, 0.01));
    net.lines[0].z_series = z;
    bool found = false;
    for (const auto& d : validate_network(net))
        if (d.message.find("singular series impedance") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("validation flags a disconnected graph") {
    Network net = minimal_network();
    net.nodes.push_back({3, net.v_base_phase, false});
    bool found = false;
    for (const auto& d : validate_network(net))
        if (d.message.find("not connected") != std::string::npos) found = true;
    CHECK(found);
}

TEST_CASE("serialize + reload preserves the (node, phase) -> row map") {
    const Network net = minimal_network();
    const std::string doc = network_to_json(net);
    std::istringstream in(doc);
    const Network again = read_network(in, "round-trip");
    REQUIRE(again.node_count() == net.node_count());
    for (int i = 0; i < net.node_count(); ++i) {
        CHECK(again.nodes[i].id == net.nodes[i].id);
        for (Phase p : all_phases) CHECK(again.row(i, p) == net.row(i, p));
    }
    CHECK(network_to_json(again) == doc);
}

TEST_CASE("validation of generated random networks is sound") {
    std::mt19937 rng(7);
    for (int k = 0; k < 20; ++k) {
        const Network net = ubopf::testing::make_random_network(rng, 2 + k % 3);
        CHECK(validate_network(net).empty());
    }
}
