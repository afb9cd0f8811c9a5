#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace maha {

// Canonical HTML form for table chunks: <table><tr><td>cell</td>...</tr>...</table>,
// cells escaped, no attributes, no whitespace between tags.

// Throws invalid_argument_error on a ragged or empty grid.
std::string canonicalize_table(const std::vector<std::vector<std::string>>& grid);

// True iff content is in the canonical form above (>= 1 row, >= 1 cell per
// row, only the entities &amp; &lt; &gt; inside cells).
bool is_canonical_table_html(std::string_view content);

// Parses canonical table HTML back into a cell grid. Throws format_error
// if the content is not canonical.
std::vector<std::vector<std::string>> table_cells_from_html(std::string_view content);

// Row-major cells joined with single spaces, entities unescaped.
std::string flatten_table_html(std::string_view content);

std::string escape_html(std::string_view text);

} // namespace maha
