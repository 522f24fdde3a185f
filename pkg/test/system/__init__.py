# This enables test discovery for the system test module