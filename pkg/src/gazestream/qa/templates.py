"""Default question phrasings. All overridable through the pipeline config."""

DEFAULT_TEMPLATES = {
    "NFI": "Which of these objects was visible in the scene but never directly looked at by the user?",
    "OTP": "The user is currently looking at the {current}. Which object will they look at next?",
    "GSM": "Which sequence correctly matches the order in which the user looked at objects?",
    "SR": "The user is now looking at the {current}. Which object was visible in the background earlier but is not visible now?",
    "OI": "Which object is the user currently looking at?",
    "FAP": "Based on the user's recent focus, what will they most likely do next?",
    "GTA": "Is the {target} currently within the user's fixation region? Answer Yes or No.",
    "OAA": "Is the {target} currently visible in the frame but outside the user's fixation region? Answer Yes or No.",
}

ATTRIBUTE_QUESTIONS = {
    "color": "What color is this object?",
    "material": "What material is this object made of?",
    "shape": "What shape is this object?",
    "texture": "What texture does this object have?",
    "size": "What size is this object?",
    "state": "What state is this object in?",
}
