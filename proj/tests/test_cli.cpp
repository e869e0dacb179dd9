#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fedwh/cli.hpp"
#include "support/fixtures.hpp"

using namespace fedwh;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path dir;

    explicit TempDir(const std::string& tag) {
        dir = fs::temp_directory_path() / ("fedwh_cli_" + tag);
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~TempDir() { fs::remove_all(dir); }

    std::string path(const std::string& name) const { return (dir / name).string(); }

    void write(const std::string& name, const std::string& content) const {
        std::ofstream out(dir / name, std::ios::binary);
        out << content;
    }
};

std::string hotel_config() { return fedwh_test::hotel_dir() + "/fed.json"; }

}  // namespace

TEST_CASE("integrate writes the catalog and reports the mapping") {
    TempDir tmp("integrate");
    std::ostringstream out, err;
    int rc = cmd_integrate(hotel_config(), tmp.path("catalog.json"), out, err);
    CHECK(rc == exit_ok);
    CHECK(fs::exists(tmp.path("catalog.json")));
    CHECK(out.str().find("Client") != std::string::npos);
    CHECK(out.str().find("Hierarchy edges") != std::string::npos);

    SUBCASE("two runs are byte-identical") {
        std::ostringstream out2, err2;
        CHECK(cmd_integrate(hotel_config(), tmp.path("catalog2.json"), out2, err2) == exit_ok);
        CHECK(fedwh_test::slurp(tmp.path("catalog.json")) ==
              fedwh_test::slurp(tmp.path("catalog2.json")));
        CHECK(out.str() == out2.str());
    }
}

TEST_CASE("query prints data on stdout and warnings on stderr") {
    TempDir tmp("query");
    std::ostringstream out, err;
    REQUIRE(cmd_integrate(hotel_config(), tmp.path("catalog.json"), out, err) == exit_ok);

    SUBCASE("csv result") {
        std::ostringstream qout, qerr;
        int rc = cmd_query(tmp.path("catalog.json"), hotel_config(),
                           "SELECT SUM(price) GROUP BY country", "csv", false, qout, qerr);
        CHECK(rc == exit_ok);
        CHECK(qout.str() == "Country,SUM(amount)\nMaroc,3900\nUK,4650\n");
        CHECK(qerr.str().empty());
    }
    SUBCASE("json result") {
        std::ostringstream qout, qerr;
        int rc = cmd_query(tmp.path("catalog.json"), hotel_config(),
                           "SELECT COUNT(price)", "json", false, qout, qerr);
        CHECK(rc == exit_ok);
        CHECK(qout.str().find("\"rows\"") != std::string::npos);
        CHECK(qout.str().find("9.0") != std::string::npos);
    }
    SUBCASE("warnings go to the diagnostic stream only") {
        std::ostringstream qout, qerr;
        int rc = cmd_query(tmp.path("catalog.json"), hotel_config(),
                           "SELECT SUM(price) WHERE year = 2015 GROUP BY country", "csv", false,
                           qout, qerr);
        CHECK(rc == exit_ok);
        CHECK(qerr.str().find("dw2") != std::string::npos);
        CHECK(qout.str().find("dw2") == std::string::npos);
    }
    SUBCASE("explain does not execute") {
        std::ostringstream qout, qerr;
        int rc = cmd_query(tmp.path("catalog.json"), hotel_config(),
                           "SELECT SUM(price) GROUP BY country", "csv", true, qout, qerr);
        CHECK(rc == exit_ok);
        CHECK(qout.str().find("sub-queries (2)") != std::string::npos);
        CHECK(qout.str().find("3900") == std::string::npos);
    }
    SUBCASE("malformed query exits 1 with a SyntaxError") {
        std::ostringstream qout, qerr;
        int rc = cmd_query(tmp.path("catalog.json"), hotel_config(), "SELECT price country",
                           "csv", false, qout, qerr);
        CHECK(rc == exit_domain_error);
        CHECK(qerr.str().find("SyntaxError") != std::string::npos);
        CHECK(qout.str().empty());
    }
    SUBCASE("unknown name exits 1") {
        std::ostringstream qout, qerr;
        int rc = cmd_query(tmp.path("catalog.json"), hotel_config(), "SELECT SUM(bogus)", "csv",
                           false, qout, qerr);
        CHECK(rc == exit_domain_error);
        CHECK(qerr.str().find("UnknownName") != std::string::npos);
    }
    SUBCASE("an excluded component's broken data does not block the query") {
        TempDir island("island");
        for (const char* c : {"c1", "c2"}) {
            fs::create_directories(island.dir / c);
            std::string dim = std::string(c) == "c1" ? "When" : "Where";
            std::ofstream(island.dir / c / "schema.json")
                << R"({"component_id":")" << c
                << R"(","fact":{"name":"f","measures":[{"name":"m","agg":"SUM"}],"links":[{"dimension":")"
                << dim << R"(","fk":"k"}]},"dimensions":[{"name":")" << dim
                << R"(","attributes":[{"name":"k","key":true},{"name":")"
                << (std::string(c) == "c1" ? "year" : "town")
                << R"(","key":false}],"parents":[]}]})";
        }
        std::ofstream(island.dir / "c1" / "f.csv") << "m,k\n4,a\n";
        std::ofstream(island.dir / "c1" / "When.csv") << "k,year\na,2001\n";
        // c2 has no CSVs at all; only the c1-only query below can run.
        island.write("fed.json", R"({"components":["c1","c2"],"ontologies":[]})");

        std::ostringstream iout, ierr;
        REQUIRE(cmd_integrate(island.path("fed.json"), island.path("catalog.json"), iout, ierr) ==
                exit_ok);
        std::ostringstream qout, qerr;
        int rc = cmd_query(island.path("catalog.json"), island.path("fed.json"),
                           "SELECT SUM(m) GROUP BY year", "csv", false, qout, qerr);
        CHECK(rc == exit_ok);
        CHECK(qout.str() == "year,SUM(m)\n2001,4\n");
        CHECK(qerr.str().find("c2 excluded") != std::string::npos);
    }
}

TEST_CASE("check validates without writing") {
    std::ostringstream out, err;
    int rc = cmd_check(hotel_config(), out, err);
    CHECK(rc == exit_ok);
    CHECK(out.str().find("OK") != std::string::npos);

    SUBCASE("missing CSV fails") {
        TempDir tmp("check");
        fs::create_directories(tmp.dir / "c1");
        std::ofstream(tmp.dir / "c1" / "schema.json")
            << R"({"component_id":"c1","fact":{"name":"f","measures":[{"name":"m","agg":"SUM"}],"links":[]},"dimensions":[]})";
        tmp.write("fed.json", R"({"components":["c1"],"ontologies":[]})");
        std::ostringstream cout2, cerr2;
        CHECK(cmd_check(tmp.path("fed.json"), cout2, cerr2) == exit_domain_error);
        CHECK(cerr2.str().find("MissingTable") != std::string::npos);
    }
    SUBCASE("unlinked twins are reported as candidates, still OK") {
        TempDir tmp("twins");
        for (const char* c : {"c1", "c2"}) {
            fs::create_directories(tmp.dir / c);
            std::string measure = std::string(c) == "c1" ? "cost" : "price";
            std::ofstream(tmp.dir / c / "schema.json")
                << R"({"component_id":")" << c << R"(","fact":{"name":"f","measures":[{"name":")"
                << measure << R"(","agg":"SUM"}],"links":[]},"dimensions":[]})";
            std::ofstream(tmp.dir / c / "f.csv") << measure << "\n5\n";
        }
        tmp.write("fed.json", R"({"components":["c1","c2"],"ontologies":[]})");
        std::ostringstream cout2, cerr2;
        CHECK(cmd_check(tmp.path("fed.json"), cout2, cerr2) == exit_ok);
        CHECK(cout2.str().find("candidate: measure cost") != std::string::npos);
        CHECK(cout2.str().find("candidate: measure price") != std::string::npos);
    }
}

TEST_CASE("usage errors exit 2") {
    TempDir tmp("usage");
    tmp.write("fed.json", R"({"components":[],"ontologies":[]})");
    std::ostringstream out, err;
    CHECK(cmd_integrate(tmp.path("fed.json"), "", out, err) == exit_usage_error);
    CHECK(err.str().find("component") != std::string::npos);

    SUBCASE("unknown format") {
        std::ostringstream qout, qerr;
        CHECK(cmd_query("nope.json", tmp.path("fed.json"), "SELECT COUNT(x)", "xml", false, qout,
                        qerr) == exit_usage_error);
    }
}

TEST_CASE("expert overrides flow through the config") {
    TempDir tmp("overrides");
    for (const char* c : {"c1", "c2"}) {
        fs::create_directories(tmp.dir / c);
        std::string measure = std::string(c) == "c1" ? "cost" : "price";
        std::ofstream(tmp.dir / c / "schema.json")
            << R"({"component_id":")" << c << R"(","fact":{"name":"f","measures":[{"name":")"
            << measure << R"(","agg":"SUM"}],"links":[]},"dimensions":[]})";
        std::ofstream(tmp.dir / c / "f.csv") << measure << "\n5\n";
    }
    tmp.write("expert.txt", "force-similar cost price\n");
    tmp.write("fed.json",
              R"({"components":["c1","c2"],"ontologies":[],"overrides":"expert.txt"})");

    std::ostringstream out, err;
    REQUIRE(cmd_integrate(tmp.path("fed.json"), tmp.path("catalog.json"), out, err) == exit_ok);
    CHECK(out.str().find("(c1.f.cost) (c2.f.price)") != std::string::npos);  // one merged measure
}

TEST_CASE("domain errors from the ontology exit 1") {
    TempDir tmp("cycle");
    fs::create_directories(tmp.dir / "c1");
    std::ofstream(tmp.dir / "c1" / "schema.json")
        << R"({"component_id":"c1","fact":{"name":"f","measures":[{"name":"m","agg":"SUM"}],"links":[]},"dimensions":[]})";
    std::ofstream(tmp.dir / "c1" / "f.csv") << "m\n";
    tmp.write("cyclic.triples", "A parentOf B\nB parentOf A\n");
    tmp.write("fed.json", R"({"components":["c1"],"ontologies":["cyclic.triples"]})");

    std::ostringstream out, err;
    CHECK(cmd_integrate(tmp.path("fed.json"), tmp.path("catalog.json"), out, err) ==
          exit_domain_error);
    CHECK(err.str().find("HierarchyCycle") != std::string::npos);
}
