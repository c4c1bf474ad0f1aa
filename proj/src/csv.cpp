#include "mfc/csv.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

namespace mfc {

namespace {

void append_number(std::string& out, double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc{}) {
        throw NumericError("export_csv: cannot format value");
    }
    out.append(buf, ptr);
}

double read_number(std::string_view field, const std::string& where) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw IoError(where + ": malformed number '" + std::string(field) + "'");
    }
    return v;
}

constexpr const char* kChannelColumns[] = {"y", "y_star", "y_star_dot", "e", "f_est", "u", "v"};
constexpr std::size_t kColumnsPerChannel = 7;

}  // namespace

std::string csv_header(std::size_t channel_count) {
    std::string h = "t";
    for (std::size_t i = 1; i <= channel_count; ++i) {
        for (const char* c : kChannelColumns) {
            h += ',';
            h += c;
            h += std::to_string(i);
        }
    }
    return h;
}

void export_csv(const ScenarioRecord& record, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("export_csv: cannot open '" + path.string() + "' for writing");
    }
    std::string line = csv_header(record.channel_count);
    line += '\n';
    out << line;
    for (const TickRow& row : record.rows) {
        line.clear();
        append_number(line, row.t);
        for (const ChannelRow& c : row.channels) {
            for (double v : {c.y, c.y_star, c.y_star_dot, c.e, c.f_est, c.u, c.v}) {
                line += ',';
                append_number(line, v);
            }
        }
        line += '\n';
        out << line;
    }
    out.flush();
    if (!out) {
        throw IoError("export_csv: write to '" + path.string() + "' failed");
    }
}

ScenarioRecord read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("read_csv: cannot open '" + path.string() + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw IoError("read_csv: '" + path.string() + "' is empty");
    }
    const auto header_fields = split_list(line, ',');
    if (header_fields.empty() || header_fields.front() != "t" || (header_fields.size() - 1) % kColumnsPerChannel != 0) {
        throw IoError("read_csv: '" + path.string() + "' has an unexpected header");
    }
    ScenarioRecord record;
    record.channel_count = (header_fields.size() - 1) / kColumnsPerChannel;
    if (line != csv_header(record.channel_count)) {
        throw IoError("read_csv: '" + path.string() + "' has an unexpected column order");
    }

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        const auto fields = split_list(line, ',');
        if (fields.size() != header_fields.size()) {
            throw IoError(where + ": expected " + std::to_string(header_fields.size()) + " fields");
        }
        TickRow row;
        row.t = read_number(fields[0], where);
        row.channels.resize(record.channel_count);
        for (std::size_t i = 0; i < record.channel_count; ++i) {
            const std::size_t base = 1 + i * kColumnsPerChannel;
            ChannelRow& c = row.channels[i];
            double* slots[] = {&c.y, &c.y_star, &c.y_star_dot, &c.e, &c.f_est, &c.u, &c.v};
            for (std::size_t j = 0; j < kColumnsPerChannel; ++j) {
                *slots[j] = read_number(fields[base + j], where);
            }
        }
        record.rows.push_back(std::move(row));
    }
    return record;
}

}  // namespace mfc
