#include "bartvs/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>

namespace bartvs {

namespace {

[[noreturn]] void csv_error(int line, const std::string& what)
{
    throw ValidationError("line " + std::to_string(line) + ": " + what);
}

} // namespace

CsvTable read_csv(std::istream& in)
{
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    CsvTable table;

    std::vector<std::string> record;
    std::string field;
    int line = 1;
    int record_line = 1;
    bool quoted = false;
    bool field_was_quoted = false;
    bool any = false;  // current record has content

    auto end_record = [&] {
        record.push_back(std::move(field));
        field.clear();
        const bool blank = record.size() == 1 && record[0].empty() && !field_was_quoted;
        if (!blank) {
            if (table.header.empty()) {
                table.header = std::move(record);
                table.header_line = record_line;
            } else {
                if (record.size() != table.header.size())
                    csv_error(record_line, "expected " + std::to_string(table.header.size()) +
                                               " fields, found " + std::to_string(record.size()));
                table.rows.push_back(std::move(record));
                table.line.push_back(record_line);
            }
        }
        record.clear();
        field_was_quoted = false;
        any = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (!any) {
            record_line = line;
            any = true;
        }
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n')
                    ++line;
                field += c;
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!field.empty())
                csv_error(line, "quote inside an unquoted field");
            quoted = true;
            field_was_quoted = true;
            break;
        case ',':
            record.push_back(std::move(field));
            field.clear();
            field_was_quoted = false;
            break;
        case '\r':
            if (i + 1 < text.size() && text[i + 1] == '\n')
                break;
            [[fallthrough]];
        case '\n':
            end_record();
            ++line;
            break;
        default:
            if (field_was_quoted)
                csv_error(line, "text after a closing quote");
            field += c;
        }
    }
    if (quoted)
        csv_error(record_line, "unterminated quoted field");
    if (any)
        end_record();
    if (table.header.empty())
        throw ValidationError("CSV input is empty (a header row is required)");
    return table;
}

CsvTable read_csv_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    return read_csv(in);
}

Dataset dataset_from_csv(const CsvTable& table, const std::string& response)
{
    int yc = -1;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (table.header[j] == response) {
            if (yc >= 0)
                throw ValidationError("response column '" + response + "' appears more than once");
            yc = static_cast<int>(j);
        }
    }
    if (yc < 0) {
        std::string cols;
        for (const auto& h : table.header)
            cols += (cols.empty() ? "" : ", ") + h;
        throw ValidationError("response column '" + response + "' not found; available columns: " + cols);
    }
    if (table.rows.empty())
        throw ValidationError("CSV has a header but no data rows");

    const Eigen::Index n = static_cast<Eigen::Index>(table.rows.size());
    const Eigen::Index p = static_cast<Eigen::Index>(table.header.size()) - 1;
    Eigen::VectorXd y(n);
    Eigen::MatrixXd X(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = table.rows[i];
        Eigen::Index col = 0;
        for (std::size_t j = 0; j < row.size(); ++j) {
            const std::string& cell = row[j];
            double v = 0.0;
            const char* first = cell.data();
            const char* last = cell.data() + cell.size();
            while (first < last && *first == ' ')
                ++first;
            while (last > first && last[-1] == ' ')
                --last;
            if (first < last && *first == '+')
                ++first;
            const auto [ptr, ec] = std::from_chars(first, last, v);
            if (first == last || ec != std::errc() || ptr != last)
                csv_error(table.line[i], "column '" + table.header[j] + "': non-numeric value '" + cell + "'");
            if (static_cast<int>(j) == yc)
                y[i] = v;
            else
                X(i, col++) = v;
        }
    }
    std::vector<std::string> names;
    for (std::size_t j = 0; j < table.header.size(); ++j)
        if (static_cast<int>(j) != yc)
            names.push_back(table.header[j]);
    if (p == 0)
        throw ValidationError("CSV has no feature columns besides '" + response + "'");
    return validate_dataset(std::move(y), std::move(X), std::move(names));
}

Dataset load_dataset(const std::string& path, const std::string& response)
{
    return dataset_from_csv(read_csv_file(path), response);
}

std::string csv_escape(const std::string& field)
{
    if (field.find_first_of(",\"\r\n") == std::string::npos)
        return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + '"';
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& fields)
{
    for (std::size_t i = 0; i < fields.size(); ++i)
        out << (i ? "," : "") << csv_escape(fields[i]);
    out << '\n';
}

void write_dataset_csv(std::ostream& out, const Dataset& data, const std::string& response)
{
    std::vector<std::string> row{response};
    row.insert(row.end(), data.feature_names.begin(), data.feature_names.end());
    write_csv_row(out, row);
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        row[0] = format_double(data.y[i]);
        for (Eigen::Index j = 0; j < data.p(); ++j)
            row[j + 1] = format_double(data.X(i, j));
        write_csv_row(out, row);
    }
}

std::string format_double(double v)
{
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

} // namespace bartvs
