#include "cft/text.hpp"
#include "cft/error.hpp"

#include <cctype>
#include <cstdio>

namespace cft {

std::string trim(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

namespace {

// Two-byte UTF-8 sequences (U+00C0..U+017F) that fold to ASCII. Covers the
// Latin-1 Supplement and Latin Extended-A ranges seen in city names.
const char* fold_codepoint(uint32_t cp) {
    switch (cp) {
        case 0xC0: case 0xC1: case 0xC2: case 0xC3: case 0xC4: case 0xC5: return "A";
        case 0xC6: return "AE";
        case 0xC7: return "C";
        case 0xC8: case 0xC9: case 0xCA: case 0xCB: return "E";
        case 0xCC: case 0xCD: case 0xCE: case 0xCF: return "I";
        case 0xD0: return "D";
        case 0xD1: return "N";
        case 0xD2: case 0xD3: case 0xD4: case 0xD5: case 0xD6: case 0xD8: return "O";
        case 0xD9: case 0xDA: case 0xDB: case 0xDC: return "U";
        case 0xDD: return "Y";
        case 0xDF: return "ss";
        case 0xE0: case 0xE1: case 0xE2: case 0xE3: case 0xE4: case 0xE5: return "a";
        case 0xE6: return "ae";
        case 0xE7: return "c";
        case 0xE8: case 0xE9: case 0xEA: case 0xEB: return "e";
        case 0xEC: case 0xED: case 0xEE: case 0xEF: return "i";
        case 0xF0: return "d";
        case 0xF1: return "n";
        case 0xF2: case 0xF3: case 0xF4: case 0xF5: case 0xF6: case 0xF8: return "o";
        case 0xF9: case 0xFA: case 0xFB: case 0xFC: return "u";
        case 0xFD: case 0xFF: return "y";
        // Latin Extended-A, the subset that shows up in place names.
        case 0x100: case 0x102: case 0x104: return "A";
        case 0x101: case 0x103: case 0x105: return "a";
        case 0x106: case 0x108: case 0x10A: case 0x10C: return "C";
        case 0x107: case 0x109: case 0x10B: case 0x10D: return "c";
        case 0x10E: case 0x110: return "D";
        case 0x10F: case 0x111: return "d";
        case 0x112: case 0x114: case 0x116: case 0x118: case 0x11A: return "E";
        case 0x113: case 0x115: case 0x117: case 0x119: case 0x11B: return "e";
        case 0x11C: case 0x11E: case 0x120: case 0x122: return "G";
        case 0x11D: case 0x11F: case 0x121: case 0x123: return "g";
        case 0x128: case 0x12A: case 0x12C: case 0x12E: case 0x130: return "I";
        case 0x129: case 0x12B: case 0x12D: case 0x12F: case 0x131: return "i";
        case 0x141: return "L";
        case 0x142: return "l";
        case 0x143: case 0x145: case 0x147: return "N";
        case 0x144: case 0x146: case 0x148: return "n";
        case 0x14C: case 0x14E: case 0x150: return "O";
        case 0x14D: case 0x14F: case 0x151: return "o";
        case 0x152: return "OE";
        case 0x153: return "oe";
        case 0x154: case 0x156: case 0x158: return "R";
        case 0x155: case 0x157: case 0x159: return "r";
        case 0x15A: case 0x15C: case 0x15E: case 0x160: return "S";
        case 0x15B: case 0x15D: case 0x15F: case 0x161: return "s";
        case 0x162: case 0x164: return "T";
        case 0x163: case 0x165: return "t";
        case 0x168: case 0x16A: case 0x16C: case 0x16E: case 0x170: case 0x172: return "U";
        case 0x169: case 0x16B: case 0x16D: case 0x16F: case 0x171: case 0x173: return "u";
        case 0x179: case 0x17B: case 0x17D: return "Z";
        case 0x17A: case 0x17C: case 0x17E: return "z";
        default: break;
    }
    return nullptr;
}

} // namespace

std::string strip_diacritics(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        if (c < 0x80) {
            out.push_back(static_cast<char>(c));
            ++i;
            continue;
        }
        // Decode one UTF-8 sequence.
        uint32_t cp = 0;
        size_t len = 0;
        if ((c & 0xE0) == 0xC0) { cp = c & 0x1F; len = 2; }
        else if ((c & 0xF0) == 0xE0) { cp = c & 0x0F; len = 3; }
        else if ((c & 0xF8) == 0xF0) { cp = c & 0x07; len = 4; }
        else { out.push_back(static_cast<char>(c)); ++i; continue; }
        if (i + len > s.size()) { out.push_back(static_cast<char>(c)); ++i; continue; }
        bool valid = true;
        for (size_t k = 1; k < len; ++k) {
            unsigned char cc = static_cast<unsigned char>(s[i + k]);
            if ((cc & 0xC0) != 0x80) { valid = false; break; }
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (!valid) { out.push_back(static_cast<char>(c)); ++i; continue; }
        if (const char* folded = fold_codepoint(cp)) {
            out += folded;
        } else {
            out.append(s.substr(i, len));
        }
        i += len;
    }
    return out;
}

std::string normalize_key(std::string_view s) {
    return lower_ascii(strip_diacritics(trim(s)));
}

std::string format_thousands(int64_t v) {
    std::string digits = std::to_string(v < 0 ? -v : v);
    std::string out;
    out.reserve(digits.size() + digits.size() / 3 + 1);
    if (v < 0) out.push_back('-');
    size_t lead = digits.size() % 3;
    if (lead == 0) lead = 3;
    out.append(digits, 0, lead);
    for (size_t i = lead; i < digits.size(); i += 3) {
        out.push_back(',');
        out.append(digits, i, 3);
    }
    return out;
}

std::string format_fixed(double v, int precision) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    return buf;
}

std::string fill_slots(std::string_view tmpl, const std::map<std::string, std::string>& slots) {
    std::string out;
    out.reserve(tmpl.size() + 16);
    size_t i = 0;
    while (i < tmpl.size()) {
        char c = tmpl[i];
        if (c == '{') {
            if (i + 1 < tmpl.size() && tmpl[i + 1] == '{') {
                out.push_back('{');
                i += 2;
                continue;
            }
            size_t close = tmpl.find('}', i + 1);
            if (close == std::string_view::npos)
                throw ConfigError("unterminated slot in template: " + std::string(tmpl));
            std::string name(tmpl.substr(i + 1, close - i - 1));
            auto it = slots.find(name);
            if (it == slots.end())
                throw ConfigError("template references unknown slot {" + name + "}: " + std::string(tmpl));
            out += it->second;
            i = close + 1;
        } else {
            out.push_back(c);
            ++i;
        }
    }
    return out;
}

std::vector<TableRow> parse_delimited(std::string_view text, char delimiter) {
    std::vector<TableRow> rows;
    TableRow row;
    std::string field;
    bool in_quotes = false;
    bool row_has_content = false;

    auto end_field = [&]() {
        row.fields.push_back(field);
        field.clear();
    };
    auto end_row = [&]() {
        end_field();
        rows.push_back(std::move(row));
        row = TableRow{};
        row_has_content = false;
    };

    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && field.empty()) {
            in_quotes = true;
            row_has_content = true;
        } else if (c == delimiter) {
            end_field();
            row_has_content = true;
        } else if (c == '\n') {
            if (row_has_content || !field.empty() || !row.fields.empty()) end_row();
        } else if (c == '\r') {
            // swallow
        } else {
            field.push_back(c);
            row_has_content = true;
        }
    }
    if (row_has_content || !field.empty() || !row.fields.empty()) end_row();
    return rows;
}

} // namespace cft
