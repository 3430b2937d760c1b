#pragma once

namespace embedkit::tok {

inline bool is_space(char32_t cp) {
  return (cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 ||
         cp == 0x2028 || cp == 0x2029;
}

// Pre-tokenization punctuation: ASCII punctuation, general punctuation,
// and the Arabic-script marks that occur in the retained ranges.
inline bool is_punct(char32_t cp) {
  if ((cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
      (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E)) {
    return true;
  }
  if (cp >= 0x2010 && cp <= 0x2027) return true;   // dashes, quotes, bullets
  if (cp >= 0x2030 && cp <= 0x205E) return true;   // permille .. misc
  switch (cp) {
    case 0x00A1: case 0x00AB: case 0x00BB: case 0x00BF:
    case 0x060C: case 0x061B: case 0x061F: case 0x066A:
    case 0x06D4: case 0x0964: case 0x0965:
      return true;
    default:
      return false;
  }
}

}  // namespace embedkit::tok
