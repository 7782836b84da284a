#include "robustmct/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace robustmct {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(trim(field));
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

bool parse_double(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

} // namespace

int CsvTable::column_index(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    return it == columns.end() ? -1 : static_cast<int>(it - columns.begin());
}

CsvTable parse_csv(std::istream& in, const std::string& origin) {
    CsvTable table;
    std::string line;
    if (!std::getline(in, line))
        throw invalid_design_error(origin + ": empty file, expected a header row");
    table.columns = split_line(line);
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        auto fields = split_line(line);
        if (fields.size() != table.columns.size())
            throw invalid_design_error(origin + ":" + std::to_string(lineno) +
                                       ": expected " + std::to_string(table.columns.size()) +
                                       " fields, got " + std::to_string(fields.size()));
        table.rows.push_back(std::move(fields));
    }
    return table;
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw invalid_design_error("cannot open '" + path + "'");
    return parse_csv(in, path);
}

std::vector<GroupedSample> ingest_samples(const CsvTable& table, const IngestConfig& config,
                                          const std::vector<std::string>& response_columns) {
    const int gcol = table.column_index(config.group_column);
    if (gcol < 0)
        throw invalid_design_error("group column '" + config.group_column + "' not found");
    std::vector<int> rcols;
    for (const auto& rc : response_columns) {
        const int c = table.column_index(rc);
        if (c < 0) throw invalid_design_error("response column '" + rc + "' not found");
        rcols.push_back(c);
    }

    // collect group labels in control-first, ascending-dose order
    std::vector<std::string> labels;
    for (const auto& row : table.rows) {
        const std::string& g = row[gcol];
        if (std::find(labels.begin(), labels.end(), g) == labels.end()) labels.push_back(g);
    }
    if (std::find(labels.begin(), labels.end(), config.control_label) == labels.end())
        throw invalid_design_error("control label '" + config.control_label +
                                   "' not present in the data");
    std::stable_sort(labels.begin(), labels.end(), [&](const std::string& a, const std::string& b) {
        if (a == config.control_label) return b != config.control_label;
        if (b == config.control_label) return false;
        double da, db;
        if (parse_double(a, da) && parse_double(b, db)) return da < db;
        return a < b;
    });

    std::vector<GroupedSample> samples;
    for (std::size_t r = 0; r < rcols.size(); ++r) {
        std::map<std::string, std::vector<double>> by_group;
        int lineno = 1;
        for (const auto& row : table.rows) {
            ++lineno;
            const std::string& raw = row[rcols[r]];
            double v;
            if (!parse_double(raw, v)) {
                if (config.drop_missing) continue;
                throw invalid_design_error("line " + std::to_string(lineno) +
                                           ": unparseable value '" + raw + "' in column '" +
                                           response_columns[r] + "'");
            }
            by_group[row[gcol]].push_back(v);
        }
        std::vector<Group> groups;
        for (const auto& label : labels) {
            const auto it = by_group.find(label);
            const std::size_t n = it == by_group.end() ? 0 : it->second.size();
            if (n < 2)
                throw invalid_design_error("group '" + label + "' has " + std::to_string(n) +
                                           " usable observations in column '" +
                                           response_columns[r] + "'");
            VectorXd y = Eigen::Map<const VectorXd>(it->second.data(), n);
            Group g{label, y, std::nullopt};
            double dose;
            if (parse_double(label, dose)) g.dose = dose;
            groups.push_back(std::move(g));
        }
        samples.emplace_back(std::move(groups));
    }
    return samples;
}

} // namespace robustmct
