import os

import django

os.environ.setdefault("DJANGO_SETTINGS_MODULE", "multipoint.settings")
django.setup()
