"""
FCL Harness Configuration
Supports multiple LLM providers: OpenAI (default), Groq, Gemini, Anthropic
Settings come from the environment, optionally seeded from a local .env file
"""

import logging
import os

from dotenv import dotenv_values

BASE_DIR = os.path.dirname(os.path.abspath(__file__))


def load_settings(path: str = None) -> None:
    """
    Copy non-secret entries of a .env file into the process environment.
    API keys are never taken from files: only the real environment provides them.
    """
    path = path or os.path.join(BASE_DIR, ".env")
    if not os.path.exists(path):
        return
    for key, value in dotenv_values(path).items():
        if value is None or key.endswith("_API_KEY"):
            continue
        os.environ.setdefault(key, value)


load_settings()


# --- Helper function to get secrets ---
def get_secret(key: str, default: str = "") -> str:
    """
    Get a setting or secret from the process environment.
    Strips whitespace and quotes that shell exports sometimes leave behind.
    """
    value = os.getenv(key, default)
    if value and isinstance(value, str):
        return value.strip().strip('"').strip("'")
    return value


def _get_int(key: str, default: int) -> int:
    try:
        return int(get_secret(key, str(default)))
    except ValueError:
        return default


def _get_float(key: str, default: float) -> float:
    try:
        return float(get_secret(key, str(default)))
    except ValueError:
        return default


# --- LLM Configuration ---
# temperature None means the model only accepts its default sampling temperature
LLM_PROVIDERS = {
    "openai": {
        "name": "OpenAI GPT-5 nano",
        "model": "gpt-5-nano-2025-08-07",
        "env_key": "OPENAI_API_KEY",
        "base_url": None,
        "temperature": None,
    },
    "openai_mini": {
        "name": "OpenAI GPT-5 mini",
        "model": "gpt-5-mini-2025-08-07",
        "env_key": "OPENAI_API_KEY",
        "base_url": None,
        "temperature": None,
    },
    "groq": {
        "name": "Groq",
        "model": "meta-llama/llama-4-scout-17b-16e-instruct",
        "env_key": "GROQ_API_KEY",
        "base_url": "https://api.groq.com/openai/v1",
        "temperature": 0.3,
    },
    "gemini": {
        "name": "Google Gemini",
        "model": "gemini-2.0-flash",
        "env_key": "GOOGLE_API_KEY",
        "base_url": None,
        "temperature": 0.3,
    },
    "anthropic": {
        "name": "Anthropic Claude",
        "model": "claude-3-5-sonnet-20241022",
        "env_key": "ANTHROPIC_API_KEY",
        "base_url": None,
        "temperature": 0.3,
    },
}

DEFAULT_PROVIDER = get_secret("FCL_PROVIDER", "openai")

# --- Harness Settings ---
LOG_LEVEL = get_secret("FCL_LOG_LEVEL", "INFO")
MAX_ITERATIONS = _get_int("FCL_MAX_ITERATIONS", 10)
AM_STARTUP_TIMEOUT = _get_float("FCL_AM_STARTUP_TIMEOUT", 10.0)
AM_CALL_TIMEOUT = _get_float("FCL_AM_CALL_TIMEOUT", 5.0)
BACKEND_RETRIES = _get_int("FCL_BACKEND_RETRIES", 3)
GENERATION_LANGUAGE = get_secret("FCL_GENERATION_LANGUAGE", "Python")

# --- Corpora ---
SPECS_DIR = os.path.join(BASE_DIR, "specs")
CONSTRAINTS_DIR = os.path.join(BASE_DIR, "constraints")
DOMAINS_DIR = os.path.join(BASE_DIR, "domains")
FIXTURES_DIR = os.path.join(BASE_DIR, "fixtures")
TRACES_DIR = os.path.join(BASE_DIR, "traces")
OUTPUT_DIR = os.path.join(BASE_DIR, "output")

# Create output directory if it doesn't exist
os.makedirs(OUTPUT_DIR, exist_ok=True)


def setup_logging(level: str = None) -> None:
    """Configure the root logger once for command-line use"""
    logging.basicConfig(
        level=getattr(logging, (level or LOG_LEVEL).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def get_available_providers():
    """Return list of providers that have API keys configured"""
    available = []
    for provider_id, config in LLM_PROVIDERS.items():
        api_key = get_secret(config["env_key"], "")
        if api_key:
            available.append({
                "id": provider_id,
                "name": config["name"],
                "model": config["model"]
            })
    return available


def get_llm(provider: str = None):
    """Get LLM instance for the specified provider"""
    provider = provider or DEFAULT_PROVIDER
    if provider not in LLM_PROVIDERS:
        raise ValueError(f"Unknown provider: {provider}")

    settings = LLM_PROVIDERS[provider]
    api_key = get_secret(settings["env_key"])
    if not api_key:
        raise ValueError(f"Provider {provider} needs {settings['env_key']} in the environment")

    extra = {}
    if settings["temperature"] is not None:
        extra["temperature"] = settings["temperature"]

    if provider in ("openai", "openai_mini", "groq"):
        from langchain_openai import ChatOpenAI
        if settings["base_url"]:
            extra["base_url"] = settings["base_url"]
        return ChatOpenAI(model=settings["model"], api_key=api_key, **extra)
    elif provider == "gemini":
        from langchain_google_genai import ChatGoogleGenerativeAI
        return ChatGoogleGenerativeAI(model=settings["model"], google_api_key=api_key, **extra)
    elif provider == "anthropic":
        from langchain_anthropic import ChatAnthropic
        return ChatAnthropic(model=settings["model"], api_key=api_key, **extra)
    else:
        raise ValueError(f"Unknown provider: {provider}")
