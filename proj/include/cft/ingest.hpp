#pragma once
// Raw table loading and the three domain builders: the city instantiation
// (temperature + population joined on normalized names), the restaurant
// instantiation (price from a listing table, generated distances), and the
// generic column-mapped path for user tables.

#include "cft/domain.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace cft {

struct RawTable {
    struct Row {
        std::string key; // raw text of the key column
        std::map<std::string, std::string> columns;
    };
    std::vector<Row> rows;
    std::string source_label;

    // First column is the key; remaining columns are named by the header.
    // Duplicate keys (after normalization) are a DataError.
    static RawTable from_delimited(std::string_view text, char delimiter,
                                   std::string source_label);
    static RawTable from_file(const std::filesystem::path& path, char delimiter);
};

struct IngestStats {
    size_t rows_considered = 0;
    size_t skipped = 0;
    std::vector<std::string> warnings;
};

struct IngestResult {
    Domain domain;
    IngestStats stats;
};

struct CityDomainConfig {
    std::string name = "cities";
    double min_population = 50000;
    std::string temperature_column = "avg_temperature_c";
    std::string population_column = "population";
    QualificationMode qualification_mode = QualificationMode::AllAttributes;
    AttributeSpec temperature_attr;
    AttributeSpec population_attr;
};

// Inner join of the two tables on normalized city name, keeping cities above
// the population floor. Unparseable cells skip the row with a warning; an
// empty join is fatal.
IngestResult load_city_domain(const RawTable& temperature_table,
                              const RawTable& population_table,
                              const CityDomainConfig& config);

struct RestaurantDomainConfig {
    std::string name = "restaurants";
    std::string name_column = "name";
    std::string city_column = "city";
    std::string price_column = "price";
    std::string city_filter = "Toronto";
    size_t sample_size = 240;
    double distance_min = 0.5;
    double distance_max = 15.0;
    QualificationMode qualification_mode = QualificationMode::AllAttributes;
    AttributeSpec price_attr;
    AttributeSpec distance_attr;
};

// Uniform sample without replacement from the filtered city's rows; distances
// drawn uniformly from [distance_min, distance_max], rounded to one decimal
// so the stored value equals its rendered form.
IngestResult load_restaurant_domain(const RawTable& listing_table,
                                    const RestaurantDomainConfig& config, uint64_t seed);

struct GenericDomainConfig {
    std::string name;
    std::string name_column;
    QualificationMode qualification_mode = QualificationMode::AllAttributes;
    // attribute spec plus the table column its values come from
    std::vector<std::pair<AttributeSpec, std::string>> attributes;
};

IngestResult load_generic_domain(const GenericDomainConfig& config, const RawTable& table);

// Dispatcher for ingest config files ({"kind": "city" | "restaurant" |
// "generic", ...}); paths in the config resolve relative to base_dir.
IngestResult run_ingest(const json& config, const std::filesystem::path& base_dir,
                        uint64_t seed);

} // namespace cft
