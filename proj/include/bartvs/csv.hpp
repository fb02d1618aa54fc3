#ifndef BARTVS_CSV_HPP
#define BARTVS_CSV_HPP

#include "bartvs/data.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace bartvs {

/// Parsed RFC-4180 table. line[i] is the 1-based physical line on which
/// record i starts (the header is line 1 unless blank lines precede it).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<int> line;
    int header_line = 1;
};

/// Quoted fields may contain commas, CRLF and doubled quotes. Every record
/// must have as many fields as the header.
CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Dataset from a table: the response column is removed and every other
/// column becomes a feature in header order.
Dataset dataset_from_csv(const CsvTable& table, const std::string& response = "y");
Dataset load_dataset(const std::string& path, const std::string& response = "y");

/// Quotes a field only when it needs it.
std::string csv_escape(const std::string& field);
void write_csv_row(std::ostream& out, const std::vector<std::string>& fields);
void write_dataset_csv(std::ostream& out, const Dataset& data, const std::string& response = "y");

/// Shortest text that reads back to the same double.
std::string format_double(double v);

} // namespace bartvs

#endif // BARTVS_CSV_HPP
