#include "cft/ingest.hpp"
#include "cft/error.hpp"
#include "cft/json_io.hpp"
#include "cft/rng.hpp"
#include "cft/text.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <unordered_map>

namespace cft {

namespace {

bool parse_number(std::string_view raw, double& out) {
    std::string cleaned;
    cleaned.reserve(raw.size());
    for (char c : raw) {
        if (c == ',' || c == ' ') continue; // "2,827,000"
        cleaned.push_back(c);
    }
    if (cleaned.empty()) return false;
    char* end = nullptr;
    out = std::strtod(cleaned.c_str(), &end);
    return end == cleaned.c_str() + cleaned.size() && std::isfinite(out);
}

// "$$" -> 2, "3" -> 3; anything outside 1..4 fails.
bool parse_price(std::string_view raw, double& out) {
    std::string t = trim(raw);
    if (t.empty()) return false;
    if (t.find_first_not_of('$') == std::string::npos) {
        out = static_cast<double>(t.size());
    } else {
        if (!parse_number(t, out)) return false;
    }
    if (out < 1.0 || out > 4.0 || out != std::floor(out)) return false;
    return true;
}

std::string make_item_id(const std::string& display) {
    std::string key = normalize_key(display);
    std::string id;
    id.reserve(key.size());
    for (char c : key) {
        if (std::isalnum(static_cast<unsigned char>(c))) id.push_back(c);
        else if (!id.empty() && id.back() != '_') id.push_back('_');
    }
    while (!id.empty() && id.back() == '_') id.pop_back();
    return id;
}

} // namespace

RawTable RawTable::from_delimited(std::string_view text, char delimiter,
                                  std::string source_label) {
    auto rows = parse_delimited(text, delimiter);
    if (rows.empty()) throw DataError("table '" + source_label + "' is empty");
    const auto& header = rows.front().fields;
    if (header.empty()) throw DataError("table '" + source_label + "' has an empty header");

    RawTable table;
    table.source_label = std::move(source_label);
    std::set<std::string> seen;
    for (size_t r = 1; r < rows.size(); ++r) {
        const auto& fields = rows[r].fields;
        if (fields.empty() || (fields.size() == 1 && trim(fields[0]).empty())) continue;
        Row row;
        row.key = trim(fields[0]);
        std::string norm = normalize_key(row.key);
        if (!seen.insert(norm).second)
            throw DataError("table '" + table.source_label + "': duplicate key '" + row.key +
                            "' after normalization");
        for (size_t c = 0; c < header.size() && c < fields.size(); ++c)
            row.columns[trim(header[c])] = trim(fields[c]);
        table.rows.push_back(std::move(row));
    }
    return table;
}

RawTable RawTable::from_file(const std::filesystem::path& path, char delimiter) {
    return from_delimited(read_file(path), delimiter, path.filename().string());
}

IngestResult load_city_domain(const RawTable& temperature_table,
                              const RawTable& population_table,
                              const CityDomainConfig& config) {
    IngestResult result;
    Domain& domain = result.domain;
    domain.name = config.name;
    domain.qualification_mode = config.qualification_mode;
    domain.attributes = {config.temperature_attr, config.population_attr};

    std::unordered_map<std::string, const RawTable::Row*> by_key;
    for (const auto& row : population_table.rows) by_key[normalize_key(row.key)] = &row;

    auto warn = [&](const std::string& msg) {
        result.stats.warnings.push_back(msg);
        ++result.stats.skipped;
    };

    for (const auto& row : temperature_table.rows) {
        ++result.stats.rows_considered;
        auto it = by_key.find(normalize_key(row.key));
        if (it == by_key.end()) {
            warn("no population entry for '" + row.key + "'");
            continue;
        }
        auto temp_cell = row.columns.find(config.temperature_column);
        if (temp_cell == row.columns.end()) {
            warn("missing column '" + config.temperature_column + "' for '" + row.key + "'");
            continue;
        }
        double temp = 0.0;
        if (!parse_number(temp_cell->second, temp)) {
            warn("unparseable temperature '" + temp_cell->second + "' for '" + row.key + "'");
            continue;
        }
        auto pop_cell = it->second->columns.find(config.population_column);
        double pop = 0.0;
        if (pop_cell == it->second->columns.end() || !parse_number(pop_cell->second, pop)) {
            warn("unparseable population for '" + row.key + "'");
            continue;
        }
        if (!(pop > config.min_population)) {
            warn("population below floor for '" + row.key + "'");
            continue;
        }
        Item item;
        item.display_name = row.key;
        item.id = make_item_id(row.key);
        item.values[config.temperature_attr.name] = temp;
        item.values[config.population_attr.name] = std::round(pop);
        domain.items.push_back(std::move(item));
    }

    if (domain.items.empty())
        throw DataError("city ingest produced an empty domain (join of '" +
                        temperature_table.source_label + "' and '" +
                        population_table.source_label + "')");
    domain.validate();
    return result;
}

IngestResult load_restaurant_domain(const RawTable& listing_table,
                                    const RestaurantDomainConfig& config, uint64_t seed) {
    if (config.distance_max <= config.distance_min)
        throw ConfigError("distance_range must satisfy min < max");
    if (config.distance_max - config.distance_min <= config.distance_attr.min_pair_difference)
        throw ConfigError("distance_range too narrow to ever clear the pair threshold");

    IngestResult result;
    Domain& domain = result.domain;
    domain.name = config.name;
    domain.qualification_mode = config.qualification_mode;
    domain.attributes = {config.price_attr, config.distance_attr};

    auto warn = [&](const std::string& msg) {
        result.stats.warnings.push_back(msg);
        ++result.stats.skipped;
    };

    std::string city_key = normalize_key(config.city_filter);
    struct Candidate {
        std::string name;
        double price;
    };
    std::vector<Candidate> candidates;
    for (const auto& row : listing_table.rows) {
        ++result.stats.rows_considered;
        auto city_cell = row.columns.find(config.city_column);
        if (city_cell == row.columns.end() || normalize_key(city_cell->second) != city_key) {
            ++result.stats.skipped;
            continue;
        }
        auto name_cell = row.columns.find(config.name_column);
        std::string name = name_cell != row.columns.end() ? name_cell->second : row.key;
        auto price_cell = row.columns.find(config.price_column);
        double price = 0.0;
        if (price_cell == row.columns.end() || !parse_price(price_cell->second, price)) {
            warn("missing or invalid price for '" + name + "'");
            continue;
        }
        candidates.push_back(Candidate{name, price});
    }

    if (config.sample_size > candidates.size())
        throw DataError("sample_size " + std::to_string(config.sample_size) +
                        " exceeds available rows (" + std::to_string(candidates.size()) +
                        ") for city '" + config.city_filter + "'");

    Rng sample_rng = derive_rng(seed, {hash_bytes("restaurant-sample")});
    auto picked = sample_indices(candidates.size(), config.sample_size, sample_rng);
    std::sort(picked.begin(), picked.end()); // canonical item order: table order

    // accounting closure: items + skipped == rows considered
    if (candidates.size() > picked.size()) {
        size_t undrawn = candidates.size() - picked.size();
        result.stats.skipped += undrawn;
        result.stats.warnings.push_back(std::to_string(undrawn) +
                                        " candidate rows not drawn in the sample");
    }

    for (size_t idx : picked) {
        const Candidate& c = candidates[idx];
        Item item;
        item.display_name = c.name;
        item.id = make_item_id(c.name);
        item.values[config.price_attr.name] = c.price;
        // One distance stream per item id: stable under re-sampling.
        Rng dist_rng = derive_rng(seed, {hash_bytes("distance"), hash_bytes(item.id)});
        double span = config.distance_max - config.distance_min;
        double d = config.distance_min + dist_rng.unit() * span;
        item.values[config.distance_attr.name] = std::round(d * 10.0) / 10.0;
        domain.items.push_back(std::move(item));
    }

    if (domain.items.empty()) throw DataError("restaurant ingest produced an empty domain");
    domain.validate();
    return result;
}

IngestResult load_generic_domain(const GenericDomainConfig& config, const RawTable& table) {
    IngestResult result;
    Domain& domain = result.domain;
    domain.name = config.name;
    domain.qualification_mode = config.qualification_mode;
    for (const auto& [attr, column] : config.attributes) domain.attributes.push_back(attr);

    auto warn = [&](const std::string& msg) {
        result.stats.warnings.push_back(msg);
        ++result.stats.skipped;
    };

    for (const auto& row : table.rows) {
        ++result.stats.rows_considered;
        std::string name = row.key;
        if (!config.name_column.empty()) {
            auto cell = row.columns.find(config.name_column);
            if (cell == row.columns.end()) {
                warn("missing name column for '" + row.key + "'");
                continue;
            }
            name = cell->second;
        }
        Item item;
        item.display_name = name;
        item.id = make_item_id(name);
        bool ok = true;
        for (const auto& [attr, column] : config.attributes) {
            auto cell = row.columns.find(column);
            double v = 0.0;
            if (cell == row.columns.end()) {
                warn("missing column '" + column + "' for '" + name + "'");
                ok = false;
                break;
            }
            bool parsed = attr.value_formatter.style == ValueFormatter::Style::Symbols
                              ? parse_price(cell->second, v)
                              : parse_number(cell->second, v);
            if (!parsed) {
                warn("unparseable value '" + cell->second + "' in column '" + column +
                     "' for '" + name + "'");
                ok = false;
                break;
            }
            item.values[attr.name] = v;
        }
        if (ok) domain.items.push_back(std::move(item));
    }

    if (domain.items.empty()) throw DataError("generic ingest produced an empty domain");
    domain.validate();
    return result;
}

namespace {

char delimiter_from(const json& cfg) {
    std::string d = cfg.value("delimiter", std::string{","});
    if (d.size() != 1) throw ConfigError("delimiter must be a single character");
    return d[0];
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

} // namespace

IngestResult run_ingest(const json& config, const std::filesystem::path& base_dir,
                        uint64_t seed) {
    require_schema(config, 1, "ingest config");
    std::string kind = config.at("kind").get<std::string>();
    char delim = delimiter_from(config);

    if (kind == "city") {
        CityDomainConfig c;
        c.name = config.value("name", c.name);
        c.min_population = config.value("min_population", c.min_population);
        c.temperature_column = config.value("temperature_column", c.temperature_column);
        c.population_column = config.value("population_column", c.population_column);
        c.qualification_mode = qualification_mode_from_string(
            config.value("qualification_mode", std::string{"all_attributes"}));
        c.temperature_attr = attribute_spec_from_json(config.at("attributes").at(0));
        c.population_attr = attribute_spec_from_json(config.at("attributes").at(1));
        RawTable temp = RawTable::from_file(
            resolve(base_dir, config.at("temperature_table").get<std::string>()), delim);
        RawTable pop = RawTable::from_file(
            resolve(base_dir, config.at("population_table").get<std::string>()), delim);
        return load_city_domain(temp, pop, c);
    }
    if (kind == "restaurant") {
        RestaurantDomainConfig c;
        c.name = config.value("name", c.name);
        c.name_column = config.value("name_column", c.name_column);
        c.city_column = config.value("city_column", c.city_column);
        c.price_column = config.value("price_column", c.price_column);
        c.city_filter = config.value("city_filter", c.city_filter);
        c.sample_size = config.value("sample_size", c.sample_size);
        if (config.contains("distance_range")) {
            c.distance_min = config.at("distance_range").at(0).get<double>();
            c.distance_max = config.at("distance_range").at(1).get<double>();
        }
        c.qualification_mode = qualification_mode_from_string(
            config.value("qualification_mode", std::string{"all_attributes"}));
        c.price_attr = attribute_spec_from_json(config.at("attributes").at(0));
        c.distance_attr = attribute_spec_from_json(config.at("attributes").at(1));
        RawTable listing = RawTable::from_file(
            resolve(base_dir, config.at("table").get<std::string>()), delim);
        return load_restaurant_domain(listing, c, seed);
    }
    if (kind == "generic") {
        GenericDomainConfig c;
        c.name = config.at("name").get<std::string>();
        c.name_column = config.value("name_column", std::string{});
        c.qualification_mode = qualification_mode_from_string(
            config.value("qualification_mode", std::string{"all_attributes"}));
        for (const json& a : config.at("attributes")) {
            AttributeSpec spec = attribute_spec_from_json(a);
            std::string column = a.value("column", spec.name);
            c.attributes.emplace_back(std::move(spec), std::move(column));
        }
        RawTable table = RawTable::from_file(
            resolve(base_dir, config.at("table").get<std::string>()), delim);
        return load_generic_domain(c, table);
    }
    throw ConfigError("unknown ingest kind '" + kind + "'");
}

} // namespace cft
