#include "timegraphs/rng.hpp"

// Header-only; this translation unit anchors the target.
