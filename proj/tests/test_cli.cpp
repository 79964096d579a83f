#include <doctest.h>
#include <json.hpp>

#include <array>
#include <cstdio>
#include <fstream>
#include <string>

using nlohmann::json;

namespace {

struct CliResult {
    int exit_code = -1;
    std::string out;
};

CliResult run_cli(const std::string& args) {
    const std::string cmd = std::string(SPIDER_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult r;
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

// Minimal JSON-schema checker covering the subset the shipped schema uses:
// type, required, properties, items, oneOf.
bool validates(const json& instance, const json& schema);

bool type_ok(const json& instance, const std::string& type) {
    if (type == "object") return instance.is_object();
    if (type == "array") return instance.is_array();
    if (type == "string") return instance.is_string();
    if (type == "boolean") return instance.is_boolean();
    if (type == "integer") return instance.is_number_integer() || instance.is_number_unsigned();
    if (type == "number") return instance.is_number();
    return false;
}

bool validates(const json& instance, const json& schema) {
    if (schema.contains("type") && !type_ok(instance, schema["type"].get<std::string>()))
        return false;
    if (schema.contains("required")) {
        for (const auto& key : schema["required"])
            if (!instance.contains(key.get<std::string>())) return false;
    }
    if (schema.contains("properties") && instance.is_object()) {
        for (const auto& [key, sub] : schema["properties"].items())
            if (instance.contains(key) && !validates(instance.at(key), sub)) return false;
    }
    if (schema.contains("items") && instance.is_array()) {
        for (const auto& el : instance)
            if (!validates(el, schema["items"])) return false;
    }
    if (schema.contains("oneOf")) {
        bool any = false;
        for (const auto& branch : schema["oneOf"]) any = any || validates(instance, branch);
        if (!any) return false;
    }
    return true;
}

json load_schema() {
    std::ifstream in(SPIDER_SCHEMA_PATH);
    REQUIRE(in.good());
    return json::parse(in);
}

} // namespace

TEST_CASE("cli: constant returns the closed-form constants") {
    const auto schema = load_schema();
    {
        const auto r = run_cli("constant --n 1");
        REQUIRE(r.exit_code == 0);
        const json out = json::parse(r.out);
        CHECK(std::abs(out["c_n"].get<double>() - std::sqrt(2.0)) < 1e-9);
        CHECK(validates(out, schema));
    }
    {
        const auto r = run_cli("constant --n 2");
        REQUIRE(r.exit_code == 0);
        const json out = json::parse(r.out);
        CHECK(std::abs(out["c_n"].get<double>() - std::sqrt(3.0)) < 1e-9);
        CHECK(std::abs(out["u000"].get<double>() - 0.75) < 1e-8);
        CHECK(validates(out, schema));
    }
}

TEST_CASE("cli: table emits the stable CSV contract") {
    const auto r = run_cli("table --n-max 3");
    REQUIRE(r.exit_code == 0);
    std::istringstream is(r.out);
    std::string line;
    int comments = 0, rows = 0;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.rfind('#', 0) == 0) {
            ++comments;
            continue;
        }
        if (!header_seen) {
            CHECK(line == "n,u000,c_n");
            header_seen = true;
            continue;
        }
        ++rows;
    }
    CHECK(comments >= 1);
    CHECK(rows == 3);
}

TEST_CASE("cli: value dispatch and region labels") {
    const auto schema = load_schema();
    const auto r = run_cli("value --n 3 --x 0.3 --y 1 --z -0.8");
    REQUIRE(r.exit_code == 0);
    const json out = json::parse(r.out);
    CHECK(out["region"] == "R1b4");
    CHECK(out["is_stopping"] == true);
    CHECK(std::abs(out["u"].get<double>() - 1.71) < 1e-12);
    CHECK(std::abs(out["gain"].get<double>() - 1.71) < 1e-12);
    CHECK(validates(out, schema));

    const auto r1 = run_cli("value --n 1 --x 0 --y 0");
    REQUIRE(r1.exit_code == 0);
    CHECK(json::parse(r1.out)["u"].get<double>() == 0.5);

    const auto r2 = run_cli("value --n 2 --x 0 --y 0 --z 0");
    CHECK(std::abs(json::parse(r2.out)["u"].get<double>() - 0.75) < 1e-8);
}

TEST_CASE("cli: boundary queries and plot data") {
    const auto schema = load_schema();
    const auto r = run_cli("boundary --n 3 --z -0.25 --s 0.5 --y 1.5");
    REQUIRE(r.exit_code == 0);
    const json out = json::parse(r.out);
    CHECK(std::abs(out["f"].get<double>() - 0.34251103822766664) < 1e-9);
    CHECK(std::abs(out["phi"].get<double>() - -0.090204010431049865) < 1e-9);
    CHECK(out["g"].get<double>() == 1.0);
    CHECK(validates(out, schema));

    const auto rp = run_cli("boundary --n 3 --plot-data /tmp/spider_test_ --samples 11");
    REQUIRE(rp.exit_code == 0);
    std::ifstream f1("/tmp/spider_test_boundary_f.csv"), f2("/tmp/spider_test_u_half_half.csv");
    CHECK(f1.good());
    CHECK(f2.good());
    std::string line;
    int rows = 0;
    while (std::getline(f1, line))
        if (line.rfind('#', 0) != 0) ++rows;
    CHECK(rows == 12); // header + samples
}

TEST_CASE("cli: simulate output and determinism given the flag set") {
    const auto schema = load_schema();
    const std::string flags = "simulate --n 2 --rule optimal --paths 2000 --step 0.03125 --seed 9";
    const auto a = run_cli(flags);
    REQUIRE(a.exit_code == 0);
    const json ja = json::parse(a.out);
    CHECK(validates(ja, schema));
    CHECK(ja["completed"] == 2000);
    const auto b = run_cli(flags);
    CHECK(ja["mean_payoff"] == json::parse(b.out)["mean_payoff"]);

    const auto fixed = run_cli("simulate --n 3 --rule fixed-time:0 --paths 100 --step 0.015625");
    CHECK(json::parse(fixed.out)["mean_payoff"] == 0.0);
}

TEST_CASE("cli: verify reports pass/fail with residuals") {
    const auto schema = load_schema();
    const auto r = run_cli("verify --n 2 --suite n2-reduction --grid-points 1000");
    REQUIRE(r.exit_code == 0);
    const json out = json::parse(r.out);
    CHECK(out["pass"] == true);
    CHECK(out["worst"].get<double>() < 1e-8);
    CHECK(validates(out, schema));
}

TEST_CASE("cli: exit codes") {
    CHECK(run_cli("constant --n 0").exit_code == 2);             // invalid input
    CHECK(run_cli("value --n 2 --x 5 --y 0").exit_code == 2);    // outside the state space
    CHECK(run_cli("verify --n 3 --suite nope").exit_code == 2);  // unknown suite
    CHECK(run_cli("nonsense").exit_code == 2);                   // unknown command
    CHECK(run_cli("constant --n 3 --tolerance 1e-30").exit_code == 3); // unreachable tolerance
    CHECK(run_cli("simulate --n 2 --rule optimal --paths 10 --step 0.015625 --max-steps 10")
              .exit_code == 4);                                  // every path capped
    // statistical failure: far-too-coarse grid cannot match the CDF
    CHECK(run_cli("verify --n 2 --suite zsigma --paths 300 --step 0.25 --seed 3").exit_code == 1);
}
