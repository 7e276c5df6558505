#include <doctest.h>

#include "aqua/synth.hpp"
