#pragma once

// Abbreviations that never end a sentence, lowercase, without the final
// period. Changing this list changes sentence boundaries and therefore every
// retrieval report; bump kAbbreviationListVersion when editing it.

#include <string_view>

namespace pqa::detail {

inline constexpr std::string_view kAbbreviationListVersion = "abbrev-1";

inline constexpr std::string_view kAbbreviations[] = {
    "mr",   "mrs",  "ms",   "dr",    "prof", "rev",  "hon",   "st",   "jr",   "sr",
    "gen",  "col",  "lt",   "capt",  "cmdr", "sgt",  "maj",   "adm",  "gov",  "sen",
    "rep",  "pres", "sec",  "amb",   "no",   "nos",  "vol",   "vs",   "etc",  "inc",
    "ltd",  "co",   "corp", "bros",  "mt",   "ft",   "ave",   "blvd", "jan",  "feb",
    "mar",  "apr",  "aug",  "sept",  "sep",  "oct",  "nov",   "dec",  "u.s",  "u.k",
    "u.n",  "e.g",  "i.e",  "a.m",   "p.m",  "fig",  "approx", "dept",
};

}  // namespace pqa::detail
