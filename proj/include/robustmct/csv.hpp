#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "robustmct/types.hpp"

namespace robustmct {

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    int column_index(const std::string& name) const;  // -1 if absent
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(std::istream& in, const std::string& origin = "<stream>");

struct IngestConfig {
    std::string group_column;
    std::string control_label;
    bool drop_missing = false;
};

/// One GroupedSample per response column; groups ordered control first,
/// remaining groups by ascending dose (numeric label) or label order.
std::vector<GroupedSample> ingest_samples(const CsvTable& table, const IngestConfig& config,
                                          const std::vector<std::string>& response_columns);

} // namespace robustmct
