#include <doctest.h>

#include "aqua/unet_io.hpp"
