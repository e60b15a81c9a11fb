#include <gtest/gtest.h>

#include <random>

#include "alpdc/unicode.hpp"

namespace u = alpdc::unicode;

TEST(Unicode, DecodeEncodeRoundTrip) {
  const std::string s = "a\xC3\xA9\xE2\x82\xAC\xF0\x9F\x98\x80";  // a é € 😀
  const auto cps = u::decode(s);
  ASSERT_EQ(cps.size(), 4u);
  EXPECT_EQ(cps[1], 0xE9u);
  EXPECT_EQ(cps[2], 0x20ACu);
  EXPECT_EQ(cps[3], 0x1F600u);
  EXPECT_EQ(u::encode(cps), s);
}

TEST(Unicode, InvalidSequencesAreLocated) {
  EXPECT_FALSE(u::find_invalid_utf8("plain ascii").has_value());
  EXPECT_EQ(u::find_invalid_utf8("ab\xFF"), 2u);
  EXPECT_EQ(u::find_invalid_utf8("\xC3"), 0u);             // truncated
  EXPECT_EQ(u::find_invalid_utf8("x\xC0\xAF"), 1u);        // overlong
  EXPECT_EQ(u::find_invalid_utf8("\xED\xA0\x80"), 0u);     // surrogate
  EXPECT_EQ(u::find_invalid_utf8("\xF4\x90\x80\x80"), 0u); // above U+10FFFF
}

TEST(Unicode, ComposesCombiningSequences) {
  EXPECT_EQ(u::fold("e\xCC\x81"), "\xC3\xA9");               // e + acute -> é
  EXPECT_EQ(u::fold("E\xCC\x81"), "\xC3\xA9");               // lowered first
  EXPECT_EQ(u::encode(u::compose(u::decode("A\xCC\x8A"))), "\xC3\x85");  // Å
  // dot below (ccc 220) and dot above (ccc 230) on s compose to U+1E69
  EXPECT_EQ(u::encode(u::compose(u::decode("s\xCC\xA3\xCC\x87"))), "\xE1\xB9\xA9");
}

TEST(Unicode, ComposeIsIdempotent) {
  std::mt19937 gen(5);
  const std::u32string alphabet = U"aeiosAEIOņ̣́̀̈̇ é";
  for (int it = 0; it < 500; ++it) {
    std::u32string s;
    for (int i = 0; i < 8; ++i) s.push_back(alphabet[gen() % alphabet.size()]);
    const auto once = u::compose(s);
    EXPECT_EQ(u::compose(once), once);
  }
}

TEST(Unicode, Classification) {
  EXPECT_TRUE(u::is_space(U' '));
  EXPECT_TRUE(u::is_space(U' '));
  EXPECT_TRUE(u::is_space(U'　'));
  EXPECT_FALSE(u::is_space(U'a'));
  EXPECT_TRUE(u::is_punct(U'.'));
  EXPECT_TRUE(u::is_punct(U'¿'));
  EXPECT_TRUE(u::is_punct(U'«'));
  EXPECT_FALSE(u::is_punct(U'$'));
  EXPECT_TRUE(u::is_digit(U'7'));
  EXPECT_TRUE(u::is_digit(U'٣'));  // Arabic-Indic three
  EXPECT_EQ(u::to_lower(U'Ж'), U'ж');
  EXPECT_EQ(u::to_lower(U'É'), U'é');
  EXPECT_EQ(u::to_lower(U'x'), U'x');
}
