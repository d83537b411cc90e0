#include "autokg/unicode.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "autokg/error.hpp"

namespace autokg::unicode {
namespace {

const icu::Normalizer2& nfc_instance() {
    UErrorCode status = U_ZERO_ERROR;
    const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
    if (U_FAILURE(status) || n == nullptr) throw Error("ICU NFC normalizer unavailable");
    return *n;
}

}  // namespace

std::string nfc(std::string_view utf8) {
    const icu::UnicodeString in =
        icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    UErrorCode status = U_ZERO_ERROR;
    const icu::UnicodeString out = nfc_instance().normalize(in, status);
    if (U_FAILURE(status)) throw Error("NFC normalisation failed");
    std::string result;
    out.toUTF8String(result);
    return result;
}

bool is_nfc(std::string_view utf8) {
    const icu::UnicodeString in =
        icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    UErrorCode status = U_ZERO_ERROR;
    const bool ok = nfc_instance().isNormalized(in, status);
    return U_SUCCESS(status) && ok;
}

std::u32string to_u32(std::string_view utf8) {
    const icu::UnicodeString s =
        icu::UnicodeString::fromUTF8(icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
    std::u32string out;
    out.reserve(static_cast<std::size_t>(s.length()));
    for (int32_t i = 0; i < s.length();) {
        const UChar32 cp = s.char32At(i);
        out.push_back(static_cast<char32_t>(cp));
        i += U16_LENGTH(cp);
    }
    return out;
}

std::string to_utf8(std::u32string_view cps) {
    icu::UnicodeString s;
    for (char32_t cp : cps) s.append(static_cast<UChar32>(cp));
    std::string out;
    s.toUTF8String(out);
    return out;
}

std::size_t length(std::string_view utf8) { return to_u32(utf8).size(); }

bool is_space(char32_t cp) { return u_isUWhiteSpace(static_cast<UChar32>(cp)); }

bool is_punct(char32_t cp) { return u_ispunct(static_cast<UChar32>(cp)); }

std::string trim(std::string_view utf8) {
    const std::u32string cps = to_u32(utf8);
    std::size_t b = 0;
    std::size_t e = cps.size();
    while (b < e && is_space(cps[b])) ++b;
    while (e > b && is_space(cps[e - 1])) --e;
    return to_utf8(std::u32string_view(cps).substr(b, e - b));
}

}  // namespace autokg::unicode
