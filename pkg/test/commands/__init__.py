# This enables test discovery for the commands test module