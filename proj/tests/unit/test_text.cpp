#include <doctest.h>

#include <random>

#include "vaxrag/text.hpp"

using namespace vaxrag;

TEST_SUITE("text") {

TEST_CASE("preprocess examples") {
    CHECK(text::preprocess("Got my shot!") == "Got my shot!");
    CHECK(text::preprocess("see https://t.co/abc @user   great") == "see great");
    CHECK(text::preprocess("https://x.com/a") == "");
    CHECK(text::preprocess("  tabs\tand\nnewlines  ") == "tabs and newlines");
    CHECK(text::preprocess("www.example.com/x is down") == "is down");
}

TEST_CASE("html entities decode to a fixed point") {
    CHECK(text::decode_html_entities("a &amp; b") == "a & b");
    CHECK(text::decode_html_entities("&amp;amp;") == "&");
    CHECK(text::decode_html_entities("&#39;hi&#x27;") == "'hi'");
    CHECK(text::decode_html_entities("&bogus; stays") == "&bogus; stays");
    CHECK(text::preprocess("&quot;sore arm&quot; &lt;3") == "\"sore arm\" <3");
}

TEST_CASE("entity-encoded url and mention are still stripped") {
    CHECK(text::preprocess("ok &#64;someone then") == "ok then");
}

TEST_CASE("preprocess is idempotent on random inputs") {
    const std::vector<std::string> atoms{"shot", "  ", "\t", "http://a.b/c", "@x", "&amp;", "&amp;amp;", "www.q.r",
                                         "!",    "é",  "&#64;y", "https://",   "@",  ".",     "\n",        "dose"};
    std::mt19937_64 rng(7);
    for (int i = 0; i < 2000; ++i) {
        std::string s;
        const int n = static_cast<int>(rng() % 12);
        for (int k = 0; k < n; ++k) {
            s += atoms[rng() % atoms.size()];
            if (rng() % 2) s += ' ';
        }
        const auto once = text::preprocess(s);
        CHECK_MESSAGE(text::preprocess(once) == once, "input: " << s);
    }
}

TEST_CASE("sentence splitting") {
    CHECK(text::split_sentences("One. Two! Three?") == std::vector<std::string>{"One.", "Two!", "Three?"});
    CHECK(text::split_sentences("Wait... what?! ok") == std::vector<std::string>{"Wait...", "what?!", "ok"});
    CHECK(text::split_sentences("line one\nline two") == std::vector<std::string>{"line one", "line two"});
    CHECK(text::split_sentences("v1.2 is out") == std::vector<std::string>{"v1.2 is out"});
    CHECK(text::split_sentences("   ").empty());
}

TEST_CASE("tokenize and content tokens") {
    CHECK(text::tokenize("Don't SKIP dose-two!") == std::vector<std::string>{"dont", "skip", "dose", "two"});
    CHECK(text::content_tokens("What is said about the sore arm?") == std::vector<std::string>{"sore", "arm"});
    CHECK(text::is_stopword("the"));
    CHECK_FALSE(text::is_stopword("shingrix"));
}

TEST_CASE("matching helpers") {
    CHECK(text::normalize_for_match("  Sore   ARM. ") == "sore arm");
    CHECK(text::contains_word_ci("Had SHINGRIX today", "shingrix"));
    CHECK_FALSE(text::contains_word_ci("shingrixes", "shingrix"));
    CHECK(text::contains_word_ci("the recombinant zoster vaccine works", "recombinant zoster vaccine"));
}

}
