#include "maha/tablehtml.hpp"

#include "maha/errors.hpp"

namespace maha {

std::string escape_html(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

std::string canonicalize_table(const std::vector<std::vector<std::string>>& grid) {
    if (grid.empty()) throw invalid_argument_error("table grid must have at least one row");
    const std::size_t width = grid.front().size();
    if (width == 0) throw invalid_argument_error("table rows must have at least one cell");
    std::string out = "<table>";
    for (const auto& row : grid) {
        if (row.size() != width) throw invalid_argument_error("table grid is ragged");
        out += "<tr>";
        for (const auto& cell : row) {
            out += "<td>";
            out += escape_html(cell);
            out += "</td>";
        }
        out += "</tr>";
    }
    out += "</table>";
    return out;
}

namespace {

struct Cursor {
    std::string_view s;
    std::size_t pos = 0;

    bool eat(std::string_view lit) {
        if (s.substr(pos, lit.size()) == lit) {
            pos += lit.size();
            return true;
        }
        return false;
    }
    bool at(std::string_view lit) const { return s.substr(pos, lit.size()) == lit; }
    bool done() const { return pos >= s.size(); }
};

// Cell text up to the closing tag; validates that '&' only starts a known
// entity and no raw '<' or '>' appears.
bool parse_cell(Cursor& c, std::string* out) {
    std::string cell;
    while (!c.done() && !c.at("</td>")) {
        char ch = c.s[c.pos];
        if (ch == '<' || ch == '>') return false;
        if (ch == '&') {
            if (c.eat("&amp;")) { cell.push_back('&'); continue; }
            if (c.eat("&lt;")) { cell.push_back('<'); continue; }
            if (c.eat("&gt;")) { cell.push_back('>'); continue; }
            return false;
        }
        cell.push_back(ch);
        ++c.pos;
    }
    if (!c.eat("</td>")) return false;
    if (out) *out = std::move(cell);
    return true;
}

bool parse_table(std::string_view content, std::vector<std::vector<std::string>>* out) {
    Cursor c{content};
    if (!c.eat("<table>")) return false;
    std::vector<std::vector<std::string>> rows;
    while (c.eat("<tr>")) {
        std::vector<std::string> row;
        while (c.eat("<td>")) {
            std::string cell;
            if (!parse_cell(c, &cell)) return false;
            row.push_back(std::move(cell));
        }
        if (row.empty()) return false;
        if (!c.eat("</tr>")) return false;
        rows.push_back(std::move(row));
    }
    if (rows.empty()) return false;
    if (!c.eat("</table>")) return false;
    if (!c.done()) return false;
    if (out) *out = std::move(rows);
    return true;
}

} // namespace

bool is_canonical_table_html(std::string_view content) {
    return parse_table(content, nullptr);
}

std::vector<std::vector<std::string>> table_cells_from_html(std::string_view content) {
    std::vector<std::vector<std::string>> rows;
    if (!parse_table(content, &rows)) {
        throw format_error("content is not canonical table HTML");
    }
    return rows;
}

std::string flatten_table_html(std::string_view content) {
    auto rows = table_cells_from_html(content);
    std::string out;
    for (const auto& row : rows) {
        for (const auto& cell : row) {
            if (!out.empty()) out.push_back(' ');
            out += cell;
        }
    }
    return out;
}

} // namespace maha
