#include <doctest.h>

#include <algorithm>
#include <functional>
#include <map>

#include "fedwh/error.hpp"
#include "fedwh/schema_model.hpp"
#include "support/fixtures.hpp"

using namespace fedwh;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const FedError& e) {
        return e.code();
    }
    FAIL("expected a FedError");
    return ErrorCode::io_error;
}

std::string minimal_descriptor(const char* dimensions_json) {
    return std::string(R"({"component_id":"t","fact":{"name":"f","measures":[{"name":"m","agg":"SUM"}],"links":[]},"dimensions":)") +
           dimensions_json + "}";
}

}  // namespace

TEST_CASE("hotel fixtures parse and classify") {
    auto dw1 = parse_component(fedwh_test::slurp(fedwh_test::hotel_dir() + "/dw1/schema.json"));
    CHECK(dw1.component_id == "dw1");
    CHECK(dw1.dimensions.size() == 2);
    CHECK(classify(dw1) == SchemaKind::star);

    auto dw2 = parse_component(fedwh_test::slurp(fedwh_test::hotel_dir() + "/dw2/schema.json"));
    CHECK(dw2.dimensions.size() == 6);  // one table per declared level
    CHECK(classify(dw2) == SchemaKind::snowflake);
    REQUIRE(dw2.find_dimension("sub_Category"));
    CHECK(dw2.find_dimension("sub_Category")->parents.front().dimension == "Category");
}

TEST_CASE("a schema with no dimensions is a valid star") {
    auto schema = parse_component(minimal_descriptor("[]"));
    CHECK(schema.dimensions.empty());
    CHECK(schema.fact.measures.size() == 1);
    CHECK(classify(schema) == SchemaKind::star);
    CHECK(topological_dimensions(schema).empty());
}

TEST_CASE("parse validation") {
    SUBCASE("parent cycle") {
        auto code = code_of([] {
            parse_component(minimal_descriptor(
                R"([{"name":"A","attributes":[{"name":"a_id","key":true},{"name":"fb","key":true}],"parents":[{"dimension":"B","fk":"fb"}]},
                    {"name":"B","attributes":[{"name":"b_id","key":true},{"name":"fa","key":true}],"parents":[{"dimension":"A","fk":"fa"}]}])"));
        });
        CHECK(code == ErrorCode::parent_cycle);
    }
    SUBCASE("dangling parent") {
        auto code = code_of([] {
            parse_component(minimal_descriptor(
                R"([{"name":"A","attributes":[{"name":"a_id","key":true}],"parents":[{"dimension":"Ghost","fk":"a_id"}]}])"));
        });
        CHECK(code == ErrorCode::dangling_parent);
    }
    SUBCASE("fk must be an attribute of the child") {
        auto code = code_of([] {
            parse_component(minimal_descriptor(
                R"([{"name":"A","attributes":[{"name":"a_id","key":true}],"parents":[{"dimension":"B","fk":"nope"}]},
                    {"name":"B","attributes":[{"name":"b_id","key":true}],"parents":[]}])"));
        });
        CHECK(code == ErrorCode::parse_error);
    }
    SUBCASE("duplicate attribute names") {
        auto code = code_of([] {
            parse_component(minimal_descriptor(
                R"([{"name":"A","attributes":[{"name":"x","key":false},{"name":"x","key":true}],"parents":[]}])"));
        });
        CHECK(code == ErrorCode::duplicate_name);
    }
    SUBCASE("role-playing fact links are rejected") {
        auto code = code_of([] {
            parse_component(
                R"({"component_id":"t","fact":{"name":"f","measures":[{"name":"m","agg":"SUM"}],
                    "links":[{"dimension":"A","fk":"f1"},{"dimension":"A","fk":"f2"}]},
                    "dimensions":[{"name":"A","attributes":[{"name":"a_id","key":true}],"parents":[]}]})");
        });
        CHECK(code == ErrorCode::duplicate_name);
    }
    SUBCASE("linked dimension needs a key attribute") {
        auto code = code_of([] {
            parse_component(
                R"({"component_id":"t","fact":{"name":"f","measures":[{"name":"m","agg":"SUM"}],
                    "links":[{"dimension":"A","fk":"fa"}]},
                    "dimensions":[{"name":"A","attributes":[{"name":"x","key":false}],"parents":[]}]})");
        });
        CHECK(code == ErrorCode::parse_error);
    }
    SUBCASE("unknown aggregation") {
        auto code = code_of([] {
            parse_component(
                R"({"component_id":"t","fact":{"name":"f","measures":[{"name":"m","agg":"MEDIAN"}],"links":[]},"dimensions":[]})");
        });
        CHECK(code == ErrorCode::parse_error);
    }
}

TEST_CASE("parse then serialize is a fixed point") {
    for (const char* path : {"/dw1/schema.json", "/dw2/schema.json"}) {
        auto first = parse_component(fedwh_test::slurp(fedwh_test::hotel_dir() + path));
        auto second = parse_component(serialize_component(first));
        CHECK(first == second);
        CHECK(serialize_component(first) == serialize_component(second));
    }
}

TEST_CASE("topological_dimensions puts ancestors first") {
    auto dw2 = parse_component(fedwh_test::slurp(fedwh_test::hotel_dir() + "/dw2/schema.json"));
    auto order = topological_dimensions(dw2);
    REQUIRE(order.size() == dw2.dimensions.size());

    auto index_of = [&](const char* name) {
        for (std::size_t i = 0; i < order.size(); ++i)
            if (order[i]->name == name) return i;
        FAIL("missing dimension ", name);
        return std::size_t(0);
    };
    CHECK(index_of("Category") < index_of("sub_Category"));
    CHECK(index_of("sub_Category") < index_of("Customer"));
    CHECK(index_of("Country") < index_of("Region"));
    CHECK(index_of("Region") < index_of("City"));
    CHECK(index_of("City") < index_of("Customer"));
}

TEST_CASE("star schemas keep declaration order") {
    auto dw1 = parse_component(fedwh_test::slurp(fedwh_test::hotel_dir() + "/dw1/schema.json"));
    auto order = topological_dimensions(dw1);
    REQUIRE(order.size() == 2);
    CHECK(order[0]->name == "Client");
    CHECK(order[1]->name == "Stay_Date");
}

TEST_CASE("diamond hierarchies order every ancestor before its descendants") {
    // D -> B -> A and D -> C -> A, declared bottom-up on purpose.
    auto schema = parse_component(minimal_descriptor(
        R"([{"name":"D","attributes":[{"name":"d_id","key":true},{"name":"fb","key":true},{"name":"fc","key":true}],
            "parents":[{"dimension":"B","fk":"fb"},{"dimension":"C","fk":"fc"}]},
            {"name":"B","attributes":[{"name":"b_id","key":true},{"name":"fa","key":true}],"parents":[{"dimension":"A","fk":"fa"}]},
            {"name":"C","attributes":[{"name":"c_id","key":true},{"name":"fa2","key":true}],"parents":[{"dimension":"A","fk":"fa2"}]},
            {"name":"A","attributes":[{"name":"a_id","key":true}],"parents":[]}])"));
    auto order = topological_dimensions(schema);

    // Brute-force check of the ancestor constraint over the edge set.
    std::map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < order.size(); ++i) position[order[i]->name] = i;
    for (const auto& dim : schema.dimensions)
        for (const auto& link : dim.parents)
            CHECK(position[link.dimension] < position[dim.name]);

    // Ties resolve by declaration order: only A is initially ready, and B is
    // declared before C.
    REQUIRE(order.size() == 4);
    CHECK(order[0]->name == "A");
    CHECK(order[1]->name == "B");
    CHECK(order[2]->name == "C");
    CHECK(order[3]->name == "D");
}
