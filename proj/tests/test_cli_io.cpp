#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gcflow/config.hpp"
#include "gcflow/time_integrator.hpp"

using namespace gcflow;

namespace {

RunConfig parse_string(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

const std::string kMinimal = R"(
[domain]
n = 2
rho = 0.7854

[flow]
alpha = 0.5
t_end = 1

[initial]
type = constant
value = 0
)";

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& contents)
        : path("/tmp/gcflow_test_" + name) {
        std::ofstream(path) << contents;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

} // namespace

TEST_CASE("minimal config parses and runs") {
    const RunConfig cfg = parse_string(kMinimal);
    REQUIRE(cfg.domain.n == 2);
    REQUIRE(cfg.domain.rho == Catch::Approx(0.7854));
    REQUIRE(cfg.params.alpha == 0.5);
    REQUIRE(cfg.params.t_end == 1.0);
    REQUIRE(cfg.initial.type == InitialType::constant);

    const Grid grid = build_grid(cfg.domain);
    const GraphField f0 = make_initial_field(cfg, grid);
    const auto res = run_flow(f0, cfg.params, grid);
    REQUIRE(res.final_state.t == Catch::Approx(1.0));
    REQUIRE(res.report.samples.back().osc_phitilde < 1e-12);
}

TEST_CASE("strict parse errors name the offending key") {
    SECTION("missing required key") {
        try {
            parse_string("[domain]\nn = 2\n[flow]\nalpha = 0.5\nt_end = 1\n[initial]\ntype = constant\n");
            FAIL("expected MissingKeyError");
        } catch (const MissingKeyError& ex) {
            REQUIRE(std::string(ex.what()).find("domain.rho") != std::string::npos);
        }
    }
    SECTION("misspelled key") {
        try {
            parse_string(kMinimal + "\n[flow]\naplha = 0.5\n");
            FAIL("expected failure");
        } catch (const ConfigError& ex) {
            // duplicate section header is legal; the bad key must be flagged
            REQUIRE(std::string(ex.what()).find("aplha") != std::string::npos);
        }
    }
    SECTION("alpha out of range cites the hypothesis") {
        std::string text = kMinimal;
        const auto pos = text.find("alpha = 0.5");
        text.replace(pos, 11, "alpha = 1.2");
        try {
            parse_string(text);
            FAIL("expected OutOfRangeError");
        } catch (const OutOfRangeError& ex) {
            const std::string what = ex.what();
            REQUIRE(what.find("flow.alpha") != std::string::npos);
            REQUIRE(what.find("0<alpha<1") != std::string::npos);
        }
    }
    SECTION("unknown section") {
        REQUIRE_THROWS_AS(parse_string(kMinimal + "\n[turbo]\nx = 1\n"), UnknownKeyError);
    }
    SECTION("duplicate key") {
        REQUIRE_THROWS_AS(parse_string(kMinimal + "\n[flow]\nalpha = 0.5\n"), ConfigError);
    }
    SECTION("key before any section") {
        REQUIRE_THROWS_AS(parse_string("n = 2\n" + kMinimal), UnknownKeyError);
    }
    SECTION("malformed line") {
        REQUIRE_THROWS_AS(parse_string(kMinimal + "\n[flow]\nwhat is this\n"), ConfigError);
    }
    SECTION("non-numeric value") {
        std::string text = kMinimal;
        const auto pos = text.find("rho = 0.7854");
        text.replace(pos, 12, "rho = wide");
        REQUIRE_THROWS_AS(parse_string(text), OutOfRangeError);
    }
    SECTION("both stopping times") {
        REQUIRE_THROWS_AS(parse_string(kMinimal + "\n[flow]\ns_end = 2\n"), OutOfRangeError);
    }
    SECTION("bad mode") {
        REQUIRE_THROWS_AS(parse_string(kMinimal + "\n[domain]\nmode = spiral\n"),
                          OutOfRangeError);
    }
}

TEST_CASE("comments and blank lines are ignored") {
    const RunConfig cfg = parse_string("# header comment\n" + kMinimal +
                                       "\n[output]\nreport = out.csv  # trailing comment\n");
    REQUIRE(cfg.output.report == "out.csv");
}

TEST_CASE("initial data variants") {
    DomainSpec spec;
    spec.nr = 17;
    const Grid grid = build_grid(spec);

    SECTION("bump") {
        RunConfig cfg = parse_string(kMinimal);
        cfg.initial.type = InitialType::bump;
        cfg.initial.amplitude = 0.05;
        cfg.initial.base = 0.1;
        const GraphField f = make_initial_field(cfg, grid);
        REQUIRE(f.phi[0] == Catch::Approx(0.15));
        REQUIRE(f.phi[grid.num_nodes() - 1] == Catch::Approx(0.1));
    }
    SECTION("inadmissible bump amplitude is rejected at load") {
        RunConfig cfg = parse_string(kMinimal);
        cfg.initial.type = InitialType::bump;
        cfg.initial.amplitude = 3.0;
        REQUIRE_THROWS_AS(make_initial_field(cfg, grid), NonAdmissibleError);
    }
    SECTION("tabulated file round trip") {
        // admissible, axis-even, Neumann-compatible profile
        std::ostringstream values;
        values.precision(17);
        auto value = [&](int i) {
            return 0.025 * (1.0 + std::cos(std::numbers::pi * i / (grid.num_nodes() - 1)));
        };
        for (int i = 0; i < grid.num_nodes(); ++i) values << value(i) << '\n';
        TempFile file("init.txt", values.str());
        RunConfig cfg = parse_string(kMinimal);
        cfg.initial.type = InitialType::file;
        cfg.initial.path = file.path;
        const GraphField f = make_initial_field(cfg, grid);
        for (int i = 0; i < grid.num_nodes(); ++i) REQUIRE(f.phi[i] == value(i));
    }
    SECTION("wrong node count in file") {
        TempFile file("short.txt", "0.0 0.1 0.2\n");
        RunConfig cfg = parse_string(kMinimal);
        cfg.initial.type = InitialType::file;
        cfg.initial.path = file.path;
        REQUIRE_THROWS_AS(make_initial_field(cfg, grid), ConfigError);
    }
    SECTION("file type requires a path") {
        REQUIRE_THROWS_AS(parse_string(kMinimal + "\n[initial]\ntype = file\n"), ConfigError);
    }
}

TEST_CASE("config-file run equals in-memory run, bitwise on the report") {
    const std::string text = R"(
[domain]
n = 2
rho = 0.7854
nr = 33

[flow]
alpha = 0.5
t_end = 0.5

[initial]
type = bump
amplitude = 0.05
)";
    TempFile file("roundtrip.cfg", text);
    const RunConfig from_file = parse_config(file.path);

    RunConfig in_memory;
    in_memory.domain.n = 2;
    in_memory.domain.rho = 0.7854;
    in_memory.domain.nr = 33;
    in_memory.params.alpha = 0.5;
    in_memory.params.t_end = 0.5;
    in_memory.initial.type = InitialType::bump;
    in_memory.initial.amplitude = 0.05;

    auto report_for = [](const RunConfig& cfg) {
        const Grid grid = build_grid(cfg.domain);
        const auto res = run_flow(make_initial_field(cfg, grid), cfg.params, grid);
        std::ostringstream os;
        res.report.write_csv(os);
        return os.str();
    };
    REQUIRE(report_for(from_file) == report_for(in_memory));
}

TEST_CASE("missing config file") {
    REQUIRE_THROWS_AS(parse_config("/nonexistent/gcflow.cfg"), ConfigError);
}
