"""Environment variable names used across the package (names are fixed)."""

LLM_API_KEY = "OFC_LLM_API_KEY"
SEARCH_API_KEY = "OFC_SEARCH_API_KEY"
SCRAPER_API_KEY = "OFC_SCRAPER_API_KEY"
DATA_DIR = "OFC_DATA_DIR"
PORT = "OFC_PORT"
