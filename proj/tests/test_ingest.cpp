#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cft/error.hpp"
#include "cft/ingest.hpp"
#include "test_util.hpp"

using namespace cft;

namespace {

CityDomainConfig mini_city_config() {
    CityDomainConfig c;
    c.min_population = 50000;
    c.temperature_attr = test::make_attribute("temperature", 10.0);
    c.population_attr = test::make_attribute("population", 2500000.0);
    return c;
}

RestaurantDomainConfig mini_restaurant_config() {
    RestaurantDomainConfig c;
    c.price_attr = test::make_attribute("price", 1.0);
    c.distance_attr = test::make_attribute("distance", 3.0);
    c.sample_size = 3;
    return c;
}

} // namespace

TEST_CASE("raw tables parse headers, trim cells, and reject duplicate keys") {
    RawTable t = RawTable::from_delimited(
        "city,temp\n London , 11.1\nOslo,5.7\n", ',', "fixture");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0].key == "London");
    CHECK(t.rows[0].columns.at("temp") == "11.1");

    CHECK_THROWS_AS(
        RawTable::from_delimited("city,t\nOslo,1\noslo ,2\n", ',', "dup"), DataError);
}

TEST_CASE("city join keeps overlapping rows above the population floor") {
    // 5 temperature rows, 3 overlap, 1 of those above 50k.
    RawTable temp = RawTable::from_delimited(
        "city,avg_temperature_c\nAville,10.0\nBville,20.5\nCville,5.0\nDville,7.0\nEville,9.0\n",
        ',', "temp");
    RawTable pop = RawTable::from_delimited(
        "city,population\nAville,49000\nBville,3200000\nCville,12000\nZville,900000\n",
        ',', "pop");
    CityDomainConfig cfg = mini_city_config();
    cfg.temperature_column = "avg_temperature_c";
    IngestResult result = load_city_domain(temp, pop, cfg);
    CHECK(result.domain.items.size() == 1);
    CHECK(result.domain.items[0].display_name == "Bville");
    CHECK(result.domain.items[0].values.at("temperature") == 20.5);
    CHECK(result.stats.skipped == 4);
    CHECK(result.stats.rows_considered == 5);
}

TEST_CASE("disjoint key sets are a fatal empty join") {
    RawTable temp =
        RawTable::from_delimited("city,avg_temperature_c\nAville,10.0\n", ',', "temp");
    RawTable pop = RawTable::from_delimited("city,population\nBville,100000\n", ',', "pop");
    CHECK_THROWS_AS(load_city_domain(temp, pop, mini_city_config()), DataError);
}

TEST_CASE("join normalizes case, whitespace and diacritics") {
    RawTable temp = RawTable::from_delimited(
        "city,avg_temperature_c\nSao Paulo,19.2\nZURICH,9.3\n", ',', "temp");
    RawTable pop = RawTable::from_delimited(
        "city,population\nS\xc3\xa3o Paulo,21800000\n zurich ,420000\n", ',', "pop");
    IngestResult result = load_city_domain(temp, pop, mini_city_config());
    CHECK(result.domain.items.size() == 2);
    // display names come from the temperature table
    CHECK(result.domain.find_item("sao_paulo") != nullptr);
    CHECK(result.domain.find_item("zurich") != nullptr);
}

TEST_CASE("unparseable numeric cells skip the row with a warning") {
    RawTable temp = RawTable::from_delimited(
        "city,avg_temperature_c\nAville,10.0\nBville,warm\n", ',', "temp");
    RawTable pop = RawTable::from_delimited(
        "city,population\nAville,3000000\nBville,4000000\n", ',', "pop");
    IngestResult result = load_city_domain(temp, pop, mini_city_config());
    CHECK(result.domain.items.size() == 1);
    CHECK(result.stats.skipped == 1);
    REQUIRE(result.stats.warnings.size() == 1);
    CHECK(result.stats.warnings[0].find("Bville") != std::string::npos);
}

TEST_CASE("restaurant ingest samples without replacement from the filtered city") {
    RawTable listing = RawTable::from_delimited(
        "name,city,price\n"
        "Alpha Grill,Toronto,$\n"
        "Beta Bistro,Toronto,$$\n"
        "Gamma Diner,Toronto,$$$\n"
        "Delta Cafe,Toronto,$$$$\n"
        "Epsilon Bar,Montreal,$$\n",
        ',', "listing");
    RestaurantDomainConfig cfg = mini_restaurant_config();

    SUBCASE("full sample of the filtered rows, any order") {
        cfg.sample_size = 4;
        IngestResult result = load_restaurant_domain(listing, cfg, 9);
        REQUIRE(result.domain.items.size() == 4);
        std::set<std::string> names;
        for (const Item& it : result.domain.items) names.insert(it.display_name);
        CHECK(names == std::set<std::string>{"Alpha Grill", "Beta Bistro", "Gamma Diner",
                                             "Delta Cafe"});
        CHECK(result.domain.item("alpha_grill").values.at("price") == 1.0);
        CHECK(result.domain.item("delta_cafe").values.at("price") == 4.0);
    }

    SUBCASE("sample size beyond the filtered rows is fatal") {
        cfg.sample_size = 5;
        CHECK_THROWS_AS(load_restaurant_domain(listing, cfg, 9), DataError);
    }

    SUBCASE("identical seeds produce identical domains") {
        cfg.sample_size = 3;
        IngestResult a = load_restaurant_domain(listing, cfg, 77);
        IngestResult b = load_restaurant_domain(listing, cfg, 77);
        CHECK(a.domain.to_json() == b.domain.to_json());
        IngestResult c = load_restaurant_domain(listing, cfg, 78);
        CHECK(a.domain.to_json() != c.domain.to_json());
    }
}

TEST_CASE("restaurant distances stay inside the configured range at one decimal") {
    std::string text = "name,city,price\n";
    for (int i = 0; i < 40; ++i)
        text += "Place " + std::to_string(i) + ",Toronto,$$\n";
    RawTable listing = RawTable::from_delimited(text, ',', "listing");
    RestaurantDomainConfig cfg = mini_restaurant_config();
    cfg.sample_size = 40;
    cfg.distance_min = 0.5;
    cfg.distance_max = 15.0;
    IngestResult result = load_restaurant_domain(listing, cfg, 3);
    for (const Item& it : result.domain.items) {
        double d = it.values.at("distance");
        CHECK(d >= 0.5);
        CHECK(d <= 15.0);
        CHECK(d == doctest::Approx(std::round(d * 10.0) / 10.0).epsilon(1e-12));
    }
}

TEST_CASE("rows with missing or out-of-range prices are skipped with warnings") {
    RawTable listing = RawTable::from_delimited(
        "name,city,price\nGood Spot,Toronto,$$\nNo Price,Toronto,\nWild One,Toronto,$$$$$\n",
        ',', "listing");
    RestaurantDomainConfig cfg = mini_restaurant_config();
    cfg.sample_size = 1;
    IngestResult result = load_restaurant_domain(listing, cfg, 1);
    CHECK(result.domain.items.size() == 1);
    CHECK(result.stats.warnings.size() == 2);
}

TEST_CASE("generic ingest maps configured columns onto attributes") {
    RawTable table = RawTable::from_delimited(
        "name,rating,price_per_night\nGrand Meridian,8.6,310\nPine Court,7.1,140\n",
        ',', "hotels");
    GenericDomainConfig cfg;
    cfg.name = "hotels";
    cfg.name_column = "name";
    cfg.attributes = {{test::make_attribute("rating", 1.0), "rating"},
                      {test::make_attribute("price", 100.0), "price_per_night"}};
    IngestResult result = load_generic_domain(cfg, table);
    CHECK(result.domain.items.size() == 2);
    CHECK(result.domain.item("grand_meridian").values.at("rating") == 8.6);
    CHECK(result.domain.item("pine_court").values.at("price") == 140.0);
}

TEST_CASE("bundled city tables join to the documented domain shape") {
    json cfg = read_json_file(test::config_dir() / "cities_ingest.json");
    IngestResult result = run_ingest(cfg, test::config_dir(), 13);
    CHECK(result.domain.items.size() == 347);
    CHECK(result.domain.attributes.size() == 2);
    const Item& lisbon = result.domain.item("lisbon");
    CHECK(lisbon.values.at("temperature") == 17.5);
    const Item& london = result.domain.item("london");
    CHECK(london.values.at("temperature") == 11.1);
    // deterministic across repeat loads
    IngestResult again = run_ingest(cfg, test::config_dir(), 13);
    CHECK(again.domain.to_json() == result.domain.to_json());
}

TEST_CASE("bundled restaurant table yields the documented sample") {
    json cfg = read_json_file(test::config_dir() / "restaurants_ingest.json");
    IngestResult result = run_ingest(cfg, test::config_dir(), 13);
    CHECK(result.domain.items.size() == 240);
    for (const Item& it : result.domain.items) {
        double p = it.values.at("price");
        CHECK(p >= 1.0);
        CHECK(p <= 4.0);
    }
}
