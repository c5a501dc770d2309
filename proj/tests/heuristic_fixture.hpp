#pragma once

#include <array>
#include <string_view>

// Twenty fixed texts for the heuristic scorer's golden test.
inline constexpr std::array<std::string_view, 20> kHeuristicFixture = {
    "",
    "ok",
    "click here click here click here click here click here click here",
    "The theory of relativity usually encompasses two interrelated physics theories by Albert Einstein.",
    "buy now cheap pills buy now cheap pills buy now cheap pills buy now cheap pills buy now",
    "Photosynthesis converts light energy into chemical energy. Plants, algae and many bacteria rely on "
    "it. The process releases oxygen as a by-product. Chlorophyll absorbs mostly blue and red light.",
    "lorem ipsum dolor sit amet consectetur adipiscing elit sed do eiusmod tempor incididunt ut labore",
    "Q: How do I reverse a list in Python? A: Use slicing with a negative step, for example items[::-1], "
    "or call the reverse() method to modify the list in place.",
    "<div><div><div><div></div></div></div></div>",
    "In 1915 Einstein presented the field equations of general relativity to the Prussian Academy. The "
    "equations relate the geometry of spacetime to the distribution of matter within it. Solutions "
    "describe black holes, gravitational waves and the expansion of the universe. Experimental tests, "
    "from the perihelion of Mercury to the detection of waves by LIGO, have confirmed its predictions "
    "with remarkable precision.",
    "the the the the the the the the the the the the the the the the the the the the",
    "Chapter 1\n\nIt was a bright cold day in April, and the clocks were striking thirteen.",
    "error error error 404 not found page not found error error",
    "We prove that every bounded monotone sequence of real numbers converges. Let (a_n) be increasing and "
    "bounded above, and let L be its supremum. For any epsilon there is N with a_N > L - epsilon, hence "
    "all later terms lie within epsilon of L.",
    "incomplete sentence that trails off without any",
    "Reviews: Great product!!! Five stars!!! Would buy again!!! Great product!!! Five stars!!!",
    "A B C D E F G H I J K L M N O P Q R S T U V W X Y Z.",
    "Wikipedia is a free online encyclopedia written and maintained by a community of volunteers through "
    "open collaboration. It is the largest reference work in history.",
    "42",
    "Mitochondria generate most of the chemical energy needed to power biochemical reactions. Energy is "
    "stored in adenosine triphosphate. Cells with higher demand, such as muscle cells, contain more "
    "mitochondria. Their double membrane encloses a matrix holding enzymes and DNA.",
};
