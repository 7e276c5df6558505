#include <doctest.h>

#include "aqua/mosaic.hpp"
