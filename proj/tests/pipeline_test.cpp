#include <doctest.h>

#include "aqua/pipeline.hpp"
